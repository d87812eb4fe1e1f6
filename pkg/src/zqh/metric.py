"""Physical metrics for zig-zag Hamiltonians.

For a ZZM Hamiltonian ``H`` every admissible metric is

    Theta = sum_n kappa2_n |psi_n>> <<psi_n| = V diag(kappa2) V^T

where the columns of ``V`` solve ``H^T V = V diag(a)``. ``V`` is a TZZM
matrix with unit diagonal, so ``Theta`` is symmetric pentadiagonal and splits
into a diagonal, a tridiagonal (zero main diagonal) and a pentadiagonal part
supported on odd-odd positions only.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from . import oracle
from .core import Orientation, ZzmMatrix, as_dense, to_dense, transpose
from .errors import (
    DimMismatch,
    NonPositiveKappa,
    NotHermitianResult,
    NotPositiveDefinite,
    NotSymmetric,
    OrientationMismatch,
    SingularFactor,
)
from .spectral import check_gap, eigenvectors_unit_diagonal, unit_diagonal_couplings

__all__ = [
    "MetricParams",
    "MetricDecomposition",
    "DysonFactor",
    "SweepReport",
    "ketket_matrix",
    "metric_from_sum",
    "metric_closed_form",
    "metric_banded",
    "banded_to_dense",
    "quasi_hermiticity_residual",
    "positive_definiteness",
    "reconstruct_hermitian",
    "metric_family_sweep",
]

QH_TOL = 1e-11
EQUIV_TOL = 1e-12
HERMITIAN_TOL = 1e-10
CHAR_POLY_TOL = 1e-8
KAPPA_RANGE = (1e-8, 1e8)


class ConditioningWarning(UserWarning):
    pass


@dataclass(frozen=True, eq=False)
class MetricParams:
    kappa2: np.ndarray

    def __post_init__(self):
        k = np.array(self.kappa2, dtype=np.float64, copy=True).reshape(-1)
        bad = ~(np.isfinite(k) & (k > 0))
        if np.any(bad):
            n = int(np.flatnonzero(bad)[0]) + 1
            raise NonPositiveKappa(n, f"kappa2_{n} = {k[n - 1]!r}; kappa2 must be strictly positive")
        k.setflags(write=False)
        object.__setattr__(self, "kappa2", k)

    @classmethod
    def ones(cls, dim: int) -> "MetricParams":
        return cls(np.ones(dim))

    def warnings(self) -> list[str]:
        lo, hi = KAPPA_RANGE
        out = []
        if np.any(self.kappa2 < lo) or np.any(self.kappa2 > hi):
            out.append(f"kappa2 outside ({lo:g}, {hi:g}); metric may be ill-conditioned")
        return out


@dataclass(frozen=True, eq=False)
class MetricDecomposition:
    diag_part: np.ndarray
    tridiag_part: np.ndarray
    pentadiag_part: np.ndarray
    assembled: np.ndarray


@dataclass(frozen=True, eq=False)
class DysonFactor:
    """Upper-triangular ``omega`` with ``omega^T omega = theta_ref``."""

    omega: np.ndarray
    theta_ref: np.ndarray


def _params(p, dim: int) -> MetricParams:
    if not isinstance(p, MetricParams):
        p = MetricParams(p)
    if p.kappa2.size != dim:
        raise DimMismatch(f"kappa2 has length {p.kappa2.size}, expected {dim}")
    for msg in p.warnings():
        warnings.warn(msg, ConditioningWarning, stacklevel=3)
    return p


def _require_zzm(H: ZzmMatrix):
    if H.orientation is not Orientation.ZZM:
        raise OrientationMismatch("metric construction expects a ZZM-oriented Hamiltonian")


def ketket_matrix(H: ZzmMatrix) -> ZzmMatrix:
    """Unit-diagonal eigenvectors of ``H^T`` (a TZZM matrix)."""
    _require_zzm(H)
    return eigenvectors_unit_diagonal(transpose(H)).vectors


def metric_from_sum(H: ZzmMatrix, p) -> np.ndarray:
    """``V diag(kappa2) V^T`` accumulated densely from the ketket columns."""
    V = to_dense(ketket_matrix(H))
    p = _params(p, H.dim)
    return (V * p.kappa2) @ V.T


def metric_banded(H: ZzmMatrix, p) -> np.ndarray:
    """Upper band of Theta as a ``(3, M)`` array.

    Row 0 is the main diagonal, row 1 holds ``Theta[i, i+1]`` in column
    ``i`` and row 2 holds ``Theta[i, i+2]`` in column ``i`` (unused tails are
    zero). Cost and memory are O(M).
    """
    _require_zzm(H)
    check_gap(H)
    n = H.dim
    k2 = _params(p, n).kappa2
    q = unit_diagonal_couplings(transpose(H))
    band = np.zeros((3, n))
    band[0] = k2
    # 0-based even i is 1-based odd m: Theta[m, m+1] = q_m kappa2_{m+1}
    band[1, 0 : n - 1 : 2] = q[0::2] * k2[1::2]
    # 1-based even n: Theta[n, n+1] = q_n kappa2_n
    band[1, 1 : n - 1 : 2] = q[1::2] * k2[1:-1:2]
    penta = _pentadiag_band(q, k2)
    band[0] += penta[0]
    band[2] = penta[1]
    return band


def _pentadiag_band(q: np.ndarray, k2: np.ndarray):
    """Diagonal and second superdiagonal of the quadratic-in-q component."""
    n = k2.size
    diag = np.zeros(n)
    upper2 = np.zeros(n)
    # odd j (0-based even i): q_j^2 kappa2_{j+1} + q_{j-1}^2 kappa2_{j-1}
    diag[0 : n - 1 : 2] += q[0::2] ** 2 * k2[1::2]
    diag[2::2] += q[1::2] ** 2 * k2[1:-1:2][: q[1::2].size]
    # (j, j+2) for odd j: q_j q_{j+1} kappa2_{j+1}
    m = q[1::2].size
    upper2[0 : 2 * m : 2] = q[0::2][:m] * q[1::2] * k2[1::2][:m]
    return diag, upper2


def banded_to_dense(band: np.ndarray) -> np.ndarray:
    n = band.shape[1]
    out = np.zeros((n, n))
    i = np.arange(n)
    out[i, i] = band[0]
    for k in (1, 2):
        j = i[: n - k]
        out[j, j + k] = band[k, : n - k]
        out[j + k, j] = band[k, : n - k]
    return out


def metric_closed_form(H: ZzmMatrix, p) -> MetricDecomposition:
    """Theta split into its diagonal, tridiagonal and pentadiagonal parts."""
    _require_zzm(H)
    check_gap(H)
    n = H.dim
    k2 = _params(p, n).kappa2
    q = unit_diagonal_couplings(transpose(H))
    i = np.arange(n)

    diag_part = np.zeros((n, n))
    diag_part[i, i] = k2

    upper1 = np.zeros(max(n - 1, 0))
    upper1[0::2] = q[0::2] * k2[1::2]
    upper1[1::2] = q[1::2] * k2[1:-1:2]
    tridiag_part = np.zeros((n, n))
    j = i[: n - 1]
    tridiag_part[j, j + 1] = upper1
    tridiag_part[j + 1, j] = upper1

    pdiag, pupper2 = _pentadiag_band(q, k2)
    pentadiag_part = np.zeros((n, n))
    pentadiag_part[i, i] = pdiag
    j = i[: max(n - 2, 0)]
    pentadiag_part[j, j + 2] = pupper2[: n - 2]
    pentadiag_part[j + 2, j] = pupper2[: n - 2]

    assembled = diag_part + tridiag_part + pentadiag_part
    return MetricDecomposition(diag_part, tridiag_part, pentadiag_part, assembled)


def _check_symmetric(theta: np.ndarray):
    scale = max(oracle.max_norm(theta), 1.0)
    if oracle.max_norm(theta - theta.T) > oracle.SYMMETRY_TOL * scale:
        raise NotSymmetric("theta is not symmetric")


def quasi_hermiticity_residual(H: ZzmMatrix, theta) -> float:
    """``||H^T Theta - Theta H||_F``."""
    theta = as_dense(theta)
    if theta.shape != H.shape:
        raise DimMismatch(f"theta has shape {theta.shape}, H is {H.shape}")
    _check_symmetric(theta)
    Hd = to_dense(H)
    return float(np.linalg.norm(Hd.T @ theta - theta @ Hd, "fro"))


def positive_definiteness(theta) -> DysonFactor:
    """Cholesky-certify ``theta`` and return ``omega = L^T``."""
    theta = as_dense(theta)
    L = oracle.cholesky(theta)
    return DysonFactor(np.ascontiguousarray(L.T), theta)


def reconstruct_hermitian(H: ZzmMatrix, f: DysonFactor) -> np.ndarray:
    """Return ``h = omega H omega^-1`` and check that it is symmetric."""
    omega = as_dense(f.omega)
    if omega.shape != H.shape:
        raise DimMismatch(f"omega has shape {omega.shape}, H is {H.shape}")
    d = np.abs(np.diag(omega))
    if np.any(d <= np.finfo(float).eps * max(d.max(initial=0.0), 1.0)):
        raise SingularFactor("Dyson factor has a zero on its diagonal")
    # h = (omega H) omega^-1, i.e. omega^T h^T = (omega H)^T
    h = np.linalg.solve(omega.T, (omega @ to_dense(H)).T).T
    hnorm = np.linalg.norm(h, "fro")
    asym = np.linalg.norm(h - h.T, "fro")
    if not asym <= HERMITIAN_TOL * hnorm:
        raise NotHermitianResult(f"||h - h^T||_F = {asym:.3e} vs ||h||_F = {hnorm:.3e}")
    if H.dim <= oracle.CHAR_POLY_MAX_DIM:
        err = oracle.char_poly_check(h, H.diag)
        if not err <= CHAR_POLY_TOL:
            raise NotHermitianResult(f"spectrum of h drifted: char poly check {err:.3e}")
    return h


@dataclass
class SweepReport:
    draws: int = 0
    passed: int = 0
    failed: int = 0
    worst_qh_residual: float = 0.0  # relative to ||H||_F ||Theta||_F
    failures: list = field(default_factory=list)


def metric_family_sweep(H: ZzmMatrix, draws: int, seed: int) -> SweepReport:
    """Check quasi-Hermiticity and positivity for random positive ``kappa2``.

    Each draw gets its own child seed, so results do not depend on the order
    in which draws are evaluated.
    """
    check_gap(H)
    report = SweepReport()
    if draws <= 0:
        return report
    hnorm = H.frobenius_norm()
    for i, child in enumerate(np.random.SeedSequence(seed).spawn(draws)):
        rng = np.random.Generator(np.random.PCG64(child))
        k2 = 10.0 ** rng.uniform(-1.0, 1.0, size=H.dim)
        theta = metric_closed_form(H, k2).assembled
        rel = quasi_hermiticity_residual(H, theta) / (hnorm * np.linalg.norm(theta, "fro"))
        report.worst_qh_residual = max(report.worst_qh_residual, rel)
        ok = rel <= QH_TOL
        try:
            positive_definiteness(theta)
        except NotPositiveDefinite:
            ok = False
        report.draws += 1
        if ok:
            report.passed += 1
        else:
            report.failed += 1
            report.failures.append(i)
    return report
