"""Per-instance invariant suite and the report structures shared by the CLI."""

from __future__ import annotations

import time
from contextlib import contextmanager
from dataclasses import dataclass, field

import numpy as np

from . import __version__, oracle
from .core import (
    Orientation,
    ZzmMatrix,
    build,
    identity,
    sandwich_chain,
    structural_mask,
    to_dense,
    transpose,
    zzm_inverse,
    zzm_multiply,
)
from .errors import NotPositiveDefinite, SingularMatrix, ZeroOddCoupling, ZqhError
from .metric import (
    metric_closed_form,
    metric_from_sum,
    positive_definiteness,
    quasi_hermiticity_residual,
    reconstruct_hermitian,
)
from .models import ModelInstance
from .spectral import (
    eigen_residual,
    eigenvectors_lemma_xy,
    eigenvectors_unit_diagonal,
    normalization_map,
    sparse_eigen_residual,
)

DEFAULT_TOLS = {
    "product": 1e-13,
    "inverse": 1e-12,
    "sandwich": 1e-12,
    "charpoly": 1e-10,
    "eigen": 1e-12,
    "oracle_column": 1e-10,
    "normalization": 1e-12,
    "metric": 1e-12,
    "qh": 1e-11,
    "hermitian": 1e-10,
    "hermitian_charpoly": 1e-8,
}
DENSE_CAP = 256


@dataclass
class Check:
    """One named residual compared against its tolerance.

    ``passed`` is always derived from ``value`` and ``tol``; a check whose
    computation raised carries the message in ``error`` and counts as failed.
    """

    name: str
    value: float | None
    tol: float
    op: str = "<="
    note: str = ""
    error: str | None = None

    @property
    def skipped(self) -> bool:
        return self.value is None and self.error is None

    @property
    def passed(self) -> bool:
        if self.error is not None:
            return False
        if self.value is None:
            return True
        if self.op == ">=":
            return self.value >= self.tol
        return self.value <= self.tol

    @property
    def status(self) -> str:
        if self.skipped:
            return "skip"
        return "pass" if self.passed else "fail"

    def to_dict(self) -> dict:
        value = self.value
        if value is not None and not np.isfinite(value):
            value = str(value)  # keep the report strict JSON
        d = {"name": self.name, "value": value, "tol": self.tol, "op": self.op, "status": self.status}
        if self.note:
            d["note"] = self.note
        if self.error is not None:
            d["error"] = self.error
        return d


class Stopwatch:
    def __init__(self):
        self.stages: dict[str, float] = {}

    @contextmanager
    def stage(self, name: str):
        t0 = time.perf_counter()
        try:
            yield
        finally:
            self.stages[name] = self.stages.get(name, 0.0) + time.perf_counter() - t0


@dataclass
class InstanceResult:
    model: ModelInstance
    checks: list[Check] = field(default_factory=list)
    timings: dict[str, float] = field(default_factory=dict)
    outputs: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def identity(self) -> dict:
        m = self.model
        return {
            "name": m.name,
            "dim": m.dim,
            "orientation": m.orientation.value,
            "seed": m.seed,
            "family": m.family,
            "hash": m.param_hash(),
        }

    def to_dict(self) -> dict:
        d = {"instance": self.identity(), "passed": self.passed, "checks": [c.to_dict() for c in self.checks]}
        d.update(self.outputs)
        return d


def build_report(command: str, argv, results: list[InstanceResult], extra: dict | None = None) -> dict:
    """Assemble a report; timing data lives only under the ``timings`` key."""
    results = sorted(results, key=lambda r: r.model.name)
    checks = [c for r in results for c in r.checks]
    report = {
        "tool": "zqh",
        "version": __version__,
        "command": command,
        "argv": list(argv),
        "instances": [r.to_dict() for r in results],
        "summary": {
            "instances": len(results),
            "checks": len(checks),
            "failed": sum(not c.passed for c in checks),
            "skipped": sum(c.skipped for c in checks),
            "passed": all(c.passed for c in checks),
        },
    }
    if extra:
        report.update(extra)
    report["timings"] = {r.model.name: r.timings for r in results}
    return report


def _run(checks: list[Check], name: str, tol: float, fn, op: str = "<="):
    """Evaluate ``fn`` into a Check; ``fn`` may return (value, note) or raise."""
    try:
        out = fn()
    except ZqhError as exc:
        checks.append(Check(name, None, tol, op, error=f"{type(exc).__name__}: {exc}"))
        return
    except ArithmeticError as exc:
        checks.append(Check(name, None, tol, op, error=f"{type(exc).__name__}: {exc}"))
        return
    note = ""
    if isinstance(out, tuple):
        out, note = out
    checks.append(Check(name, None if out is None else float(out), tol, op, note))


def _skip(checks, name, tol, note):
    checks.append(Check(name, None, tol, note=note))


def product_error(A: ZzmMatrix, B: ZzmMatrix) -> float:
    """Componentwise relative error of the closed-form product.

    Off-pattern entries of the dense product must be exactly zero; any
    fill-in is reported as ``inf``.
    """
    P = to_dense(zzm_multiply(A, B))
    Ad, Bd = to_dense(A), to_dense(B)
    R = oracle.dense_multiply(Ad, Bd)
    mask = structural_mask(A.dim, A.orientation)
    if np.any(R[~mask] != 0.0) or np.any(P[~mask] != 0.0):
        return float("inf")
    scale = oracle.dense_multiply(np.abs(Ad), np.abs(Bd))
    diff = np.abs(P - R)
    rel = np.divide(diff, scale, out=np.zeros_like(diff), where=scale > 0)
    return float(np.max(rel, initial=0.0))


def inverse_tolerance(A: ZzmMatrix, tol: float) -> float:
    a = np.abs(A.diag)
    return tol * float(a.max() / a.min())


def inverse_residual(A: ZzmMatrix) -> float:
    P = zzm_multiply(A, zzm_inverse(A))
    I = identity(A.dim, A.orientation)
    return float(max(np.max(np.abs(P.diag - I.diag)), np.max(np.abs(P.off), initial=0.0)))


def sandwich_error(A: ZzmMatrix, power: int) -> float:
    a, c = A.diag, A.off
    if power == 1:
        expected = build(a, -c, A.orientation)
    else:
        expected = build(a * a, -c * (a[:-1] + a[1:]), A.orientation)
    chain = sandwich_chain(A, power)
    scale = max(np.max(np.abs(expected.diag)), np.max(np.abs(expected.off), initial=0.0))
    err = max(np.max(np.abs(chain.diag - expected.diag)), np.max(np.abs(chain.off - expected.off), initial=0.0))
    return float(err / scale)


def relative_eigen_residual(H: ZzmMatrix, Q: ZzmMatrix, dense: bool) -> float:
    res = eigen_residual(H, to_dense(Q)) if dense else sparse_eigen_residual(H, Q)
    return res / (H.frobenius_norm() * Q.frobenius_norm())


def oracle_column_error(H: ZzmMatrix, Q: ZzmMatrix) -> float:
    """Worst column deviation from the nullspace oracle (unit n-th entry)."""
    Hd, Qd = to_dense(H), to_dense(Q)
    worst = 0.0
    for n in range(H.dim):
        v = oracle.nullspace_vector(Hd, H.diag[n])
        v = v / v[n]
        worst = max(worst, float(np.max(np.abs(v - Qd[:, n])) / np.max(np.abs(Qd[:, n]))))
    return worst


def bandwidth_violations(theta: np.ndarray) -> int:
    n = theta.shape[0]
    i, j = np.indices((n, n))
    off = np.abs(i - j)
    allowed = (off <= 1) | ((off == 2) & (i % 2 == 0) & (j % 2 == 0))
    return int(np.count_nonzero(theta[~allowed]))


def verify_instance(m: ModelInstance, tols: dict | None = None, dense_cap: int = DENSE_CAP) -> InstanceResult:
    """Run the full invariant suite on one instance."""
    tols = {**DEFAULT_TOLS, **(tols or {})}
    res = InstanceResult(m)
    checks = res.checks
    clock = Stopwatch()
    H = build(m.a, m.c, Orientation.ZZM)
    M = H.dim
    dense = M <= dense_cap
    too_big = f"M > dense cap {dense_cap}"

    with clock.stage("algebra"):
        B = build(m.a[::-1], m.c[::-1], Orientation.ZZM)
        for label, X, Y in (("zzm", H, B), ("tzzm", transpose(H), transpose(B))):
            if dense:
                _run(checks, f"product_closure_{label}", tols["product"], lambda X=X, Y=Y: product_error(X, Y))
            else:
                _skip(checks, f"product_closure_{label}", tols["product"], too_big)
        try:
            zzm_inverse(H)
            invertible = True
        except SingularMatrix as exc:
            invertible = False
            why = f"singular: {exc}"
        if invertible:
            itol = inverse_tolerance(H, tols["inverse"])
            _run(checks, "inverse_residual", itol, lambda: inverse_residual(H))
            if dense:
                def vs_oracle():
                    ref = oracle.dense_inverse(to_dense(H)).solution
                    return oracle.max_norm(to_dense(zzm_inverse(H)) - ref) / oracle.max_norm(ref)

                _run(checks, "inverse_vs_oracle", itol, vs_oracle)
            else:
                _skip(checks, "inverse_vs_oracle", itol, too_big)
            _run(checks, "sandwich_diag", tols["sandwich"], lambda: sandwich_error(H, 1))
            _run(checks, "sandwich_diag_squared", tols["sandwich"], lambda: sandwich_error(H, 2))
        else:
            for name in ("inverse_residual", "inverse_vs_oracle", "sandwich_diag", "sandwich_diag_squared"):
                _skip(checks, name, tols["inverse"], why)
        if M <= oracle.CHAR_POLY_MAX_DIM:
            _run(checks, "spectrum_charpoly", tols["charpoly"], lambda: oracle.char_poly_check(to_dense(H), H.diag))

    with clock.stage("spectral"):
        systems = {}
        for label, X in (("zzm", H), ("tzzm", transpose(H))):
            def unit(X=X, label=label):
                systems[label] = eigenvectors_unit_diagonal(X)
                return relative_eigen_residual(X, systems[label].vectors, dense)

            _run(checks, f"eigen_unit_diagonal_{label}", tols["eigen"], unit)
            if label in systems and dense:
                _run(checks, f"eigen_oracle_{label}", tols["oracle_column"],
                     lambda X=X, label=label: oracle_column_error(X, systems[label].vectors))

        def xy():
            try:
                systems["xy"] = eigenvectors_lemma_xy(H)
            except ZeroOddCoupling as exc:
                return None, f"not applicable: {exc}"
            return relative_eigen_residual(H, systems["xy"].vectors, dense)

        _run(checks, "eigen_lemma_xy_zzm", tols["eigen"], xy)
        if "xy" in systems and "zzm" in systems and dense:
            def nmap():
                rho = normalization_map(systems["zzm"], systems["xy"])
                Q1, Q2 = systems["zzm"].dense_vectors(), systems["xy"].dense_vectors()
                return oracle.max_norm(Q1 * rho - Q2) / oracle.max_norm(Q2)

            _run(checks, "normalization_map", tols["normalization"], nmap)

    with clock.stage("metric"):
        k2 = m.metric_params()
        theta = {}
        if dense:
            def equiv():
                theta["sum"] = metric_from_sum(H, k2)
                theta["closed"] = metric_closed_form(H, k2).assembled
                return np.linalg.norm(theta["closed"] - theta["sum"]) / np.linalg.norm(theta["sum"])

            _run(checks, "metric_equivalence", tols["metric"], equiv)
            for label in ("sum", "closed"):
                if label in theta:
                    t = theta[label]
                    _run(checks, f"quasi_hermiticity_{label}", tols["qh"],
                         lambda t=t: quasi_hermiticity_residual(H, t) / (H.frobenius_norm() * np.linalg.norm(t)))
            if "closed" in theta:
                _run(checks, "pentadiagonal_band", 0.0, lambda: bandwidth_violations(theta["closed"]))
        else:
            for name in ("metric_equivalence", "quasi_hermiticity_sum", "quasi_hermiticity_closed", "pentadiagonal_band"):
                _skip(checks, name, tols["metric"], too_big)

    with clock.stage("reconstruction"):
        if "closed" in theta:
            factor = {}

            def positivity():
                factor["f"] = positive_definiteness(theta["closed"])
                return 0.0

            _run(checks, "positivity_cholesky", 0.0, positivity)

            def negated():
                V = to_dense(eigenvectors_unit_diagonal(transpose(H)).vectors)
                k = k2.kappa2.copy()
                k[M // 2] = -k[M // 2]
                try:
                    positive_definiteness((V * k) @ V.T)
                except NotPositiveDefinite:
                    return 0.0
                return 1.0, "Cholesky accepted an indefinite metric"

            _run(checks, "positivity_negated_kappa", 0.0, negated)
            if "f" in factor:
                def hermitian():
                    h = reconstruct_hermitian(H, factor["f"])
                    factor["h"] = h
                    return np.linalg.norm(h - h.T) / np.linalg.norm(h)

                _run(checks, "hermitian_reconstruction", tols["hermitian"], hermitian)
                if "h" in factor and M <= oracle.CHAR_POLY_MAX_DIM:
                    _run(checks, "hermitian_charpoly", tols["hermitian_charpoly"],
                         lambda: oracle.char_poly_check(factor["h"], H.diag))
        elif not dense:
            for name in ("positivity_cholesky", "positivity_negated_kappa", "hermitian_reconstruction"):
                _skip(checks, name, 0.0, too_big)

    res.timings = clock.stages
    return res
