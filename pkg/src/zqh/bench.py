"""Timing harness: closed-form O(M) pipeline versus the dense O(M^3) oracle."""

from __future__ import annotations

import csv
import io
import time

import numpy as np

from . import oracle
from .core import to_dense, transpose, zzm_inverse
from .metric import metric_banded
from .models import generate
from .spectral import eigenvectors_unit_diagonal

CSV_COLUMNS = ("M", "op", "nanos_median", "nanos_p90", "bytes_peak_estimate")
DEFAULT_DIMS = (64, 128, 256, 1024, 16384, 100000)
_F8 = 8


def _closed_pipeline(H, k2):
    eigenvectors_unit_diagonal(H)
    metric_banded(H, k2)


def _dense_metric(H, k2):
    V = to_dense(eigenvectors_unit_diagonal(transpose(H)).vectors)
    oracle.dense_multiply(V * k2, np.ascontiguousarray(V.T))


def _ops(M: int, dense_cap: int):
    """(op name, callable factory, analytic peak bytes) for size ``M``."""
    ops = [
        # a, c, q, the eigenvector parameters and the (3, M) band
        ("closed_form_pipeline", _closed_pipeline, _F8 * (4 * M + 3 * (M - 1) + 3 * M)),
        ("closed_form_inverse", lambda H, k2: zzm_inverse(H), _F8 * 2 * (2 * M - 1)),
    ]
    if M <= dense_cap:
        # augmented [A | I], the inverse and the residual product
        ops.append(("dense_inverse", lambda H, k2: oracle.dense_inverse(to_dense(H)), _F8 * 5 * M * M))
        ops.append(("dense_metric", _dense_metric, _F8 * 4 * M * M))
    return ops


def time_call(fn, repetitions: int) -> np.ndarray:
    fn()  # warm-up (JIT compilation, caches)
    out = np.empty(repetitions)
    for i in range(repetitions):
        t0 = time.perf_counter_ns()
        fn()
        out[i] = time.perf_counter_ns() - t0
    return out


def run_bench(dims=DEFAULT_DIMS, repetitions: int = 5, dense_cap: int = 256, seed: int = 0) -> list[dict]:
    rows = []
    for M in dims:
        m = generate("uniform", M, seed)
        H, k2 = m.hamiltonian, m.kappa2
        for name, fn, nbytes in _ops(M, dense_cap):
            t = time_call(lambda: fn(H, k2), repetitions)
            rows.append(
                {
                    "M": int(M),
                    "op": name,
                    "nanos_median": int(np.median(t)),
                    "nanos_p90": int(np.percentile(t, 90)),
                    "bytes_peak_estimate": int(nbytes),
                }
            )
    return rows


def rows_to_csv(rows) -> str:
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=CSV_COLUMNS, lineterminator="\n")
    writer.writeheader()
    writer.writerows(rows)
    return buf.getvalue()


def growth(rows, op: str, m_lo: int, m_hi: int) -> float | None:
    """Ratio of median times between two sizes for one op, if both exist."""
    t = {r["M"]: r["nanos_median"] for r in rows if r["op"] == op}
    if m_lo in t and m_hi in t and t[m_lo] > 0:
        return t[m_hi] / t[m_lo]
    return None
