"""Closed-form eigensystems of zig-zag Hamiltonians.

The spectrum of a ZZM/TZZM matrix is its diagonal, and the matrix of
eigenvectors (column ``n`` belongs to ``a_n``) is again a zig-zag matrix of
the same orientation. Two normalizations are provided:

* unit diagonal: ``Q = H(1, q)`` with ``q_k = s(k) * c_k / (a_k - a_{k+1})``;
* "x/y": ``Q = H(x, y)`` with ``x_2 = x_4 = ... = 1`` and
  ``y_1 = y_3 = ... = 1`` (ZZM only, needs ``c_j != 0`` at odd ``j``).

The sign ``s(k)`` depends on orientation and on the parity of ``k``; see
:data:`SIGN_TABLE`.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .core import Orientation, ZzmMatrix, as_dense, build, to_dense, zzm_multiply
from .errors import (
    DegenerateSpectrum,
    DimMismatch,
    DimTooSmall,
    NotProportional,
    OrientationMismatch,
    ZeroOddCoupling,
)

__all__ = [
    "Normalization",
    "EigenSystem",
    "SpectrumGapReport",
    "GAP_TOL",
    "EIGEN_TOL",
    "SIGN_TABLE",
    "eigenvalues",
    "adjacent_gap",
    "check_gap",
    "coupling_signs",
    "unit_diagonal_couplings",
    "eigenvectors_unit_diagonal",
    "eigenvectors_lemma_xy",
    "normalization_map",
    "eigen_residual",
    "sparse_eigen_residual",
]

GAP_TOL = 1e-10
EIGEN_TOL = 1e-12
PROPORTIONAL_TOL = 1e-12

# s(k) for q_k = s(k) * c_k / (a_k - a_{k+1}), keyed by (orientation, k odd).
# Fixed by substituting the columns into H Q = Q diag(a); frozen by the
# regression tests against the nullspace oracle.
SIGN_TABLE = {
    (Orientation.ZZM, True): 1.0,
    (Orientation.ZZM, False): -1.0,
    (Orientation.TZZM, True): -1.0,
    (Orientation.TZZM, False): 1.0,
}


class Normalization(enum.Enum):
    UNIT_DIAGONAL = "unit_diagonal"
    LEMMA_XY = "lemma_xy"


@dataclass(frozen=True, eq=False)
class EigenSystem:
    hamiltonian: ZzmMatrix
    eigenvalues: np.ndarray
    vectors: ZzmMatrix
    normalization: Normalization

    @property
    def dim(self) -> int:
        return self.hamiltonian.dim

    def dense_vectors(self) -> np.ndarray:
        return to_dense(self.vectors)

    def residual(self) -> float:
        return sparse_eigen_residual(self.hamiltonian, self.vectors)


@dataclass(frozen=True)
class SpectrumGapReport:
    gap: float
    index: int  # 1-based k of the pair (a_k, a_{k+1})
    relative_gap: float


def eigenvalues(H: ZzmMatrix) -> np.ndarray:
    return H.diag.copy()


def adjacent_gap(H: ZzmMatrix) -> SpectrumGapReport:
    if H.dim < 2:
        raise DimTooSmall("adjacent_gap needs M >= 2")
    gaps = np.abs(np.diff(H.diag))
    k = int(np.argmin(gaps))
    scale = float(np.max(np.abs(H.diag)))
    gap = float(gaps[k])
    return SpectrumGapReport(gap, k + 1, gap / scale if scale > 0 else 0.0)


def check_gap(H: ZzmMatrix, tol: float = GAP_TOL) -> None:
    """Raise DegenerateSpectrum unless every adjacent gap exceeds ``tol * max|a|``."""
    if H.dim < 2:
        return
    scale = float(np.max(np.abs(H.diag)))
    gaps = np.abs(np.diff(H.diag))
    bad = gaps <= tol * scale
    if np.any(bad):
        k = int(np.flatnonzero(bad)[0]) + 1
        raise DegenerateSpectrum(k, f"a_{k} and a_{k + 1} coincide (gap {gaps[k - 1]:.3e})")


def coupling_signs(dim: int, orientation) -> np.ndarray:
    orientation = Orientation.coerce(orientation)
    odd_k = np.arange(dim - 1) % 2 == 0
    return np.where(
        odd_k, SIGN_TABLE[(orientation, True)], SIGN_TABLE[(orientation, False)]
    )


def unit_diagonal_couplings(H: ZzmMatrix) -> np.ndarray:
    """The ``q`` vector of the unit-diagonal eigenvector matrix."""
    a, c = H.diag, H.off
    return coupling_signs(H.dim, H.orientation) * c / (a[:-1] - a[1:])


def sparse_eigen_residual(H: ZzmMatrix, Q: ZzmMatrix) -> float:
    """``||H Q - Q diag(a)||_F`` evaluated entirely with closed-form products."""
    D = ZzmMatrix(H.diag, np.zeros(H.dim - 1), H.orientation)
    HQ = zzm_multiply(H, Q)
    QD = zzm_multiply(Q, D)
    return float(
        np.sqrt(np.sum((HQ.diag - QD.diag) ** 2) + np.sum((HQ.off - QD.off) ** 2))
    )


def _certify(H: ZzmMatrix, Q: ZzmMatrix) -> None:
    res = sparse_eigen_residual(H, Q)
    bound = EIGEN_TOL * H.frobenius_norm() * Q.frobenius_norm()
    if not res <= bound:
        raise ArithmeticError(f"eigen residual {res:.3e} exceeds {bound:.3e}")


def eigenvectors_unit_diagonal(H: ZzmMatrix) -> EigenSystem:
    check_gap(H)
    Q = build(np.ones(H.dim), unit_diagonal_couplings(H), H.orientation)
    _certify(H, Q)
    return EigenSystem(H, eigenvalues(H), Q, Normalization.UNIT_DIAGONAL)


def eigenvectors_lemma_xy(H: ZzmMatrix) -> EigenSystem:
    """Eigenvectors with unit entries at even diagonal slots and odd couplings.

    Odd columns are rescaled by ``x_j = (a_j - a_{j+1}) / c_j`` so that the
    subdiagonal entry of the column becomes 1. When ``M`` is odd the last
    column has no subdiagonal slot and keeps ``x_M = 1``.
    """
    if H.orientation is not Orientation.ZZM:
        raise OrientationMismatch("x/y normalization is defined for ZZM orientation only")
    check_gap(H)
    a, c = H.diag, H.off
    odd_c = c[0::2]
    zero = odd_c == 0.0
    if np.any(zero):
        j = 2 * int(np.flatnonzero(zero)[0]) + 1
        raise ZeroOddCoupling(j, f"c_{j} = 0 at odd j")
    n = H.dim
    x = np.ones(n)
    x[0 : n - 1 : 2] = (a[:-1][0::2] - a[1:][0::2]) / odd_c
    y = np.empty(n - 1)
    y[0::2] = 1.0
    # y_k (even k) = x_{k+1} q_k; q_k for even k carries the minus sign
    q_even = -c[1::2] / (a[:-1][1::2] - a[1:][1::2])
    y[1::2] = x[2::2][: q_even.size] * q_even
    Q = build(x, y, Orientation.ZZM)
    _certify(H, Q)
    return EigenSystem(H, eigenvalues(H), Q, Normalization.LEMMA_XY)


def normalization_map(sys1: EigenSystem, sys2: EigenSystem) -> np.ndarray:
    """Diagonal ``rho`` with ``Q1 diag(rho) = Q2`` (column-by-column rescaling)."""
    Q1 = sys1.dense_vectors()
    Q2 = sys2.dense_vectors()
    if Q1.shape != Q2.shape:
        raise DimMismatch(f"{Q1.shape} vs {Q2.shape}")
    norms = np.sum(Q1 * Q1, axis=0)
    if np.any(norms == 0.0):
        raise NotProportional(int(np.flatnonzero(norms == 0.0)[0]) + 1, "zero column")
    rho = np.sum(Q1 * Q2, axis=0) / norms
    err = np.max(np.abs(Q1 * rho - Q2), axis=0)
    scale = np.max(np.abs(Q2), axis=0)
    bad = err > PROPORTIONAL_TOL * scale
    if np.any(bad):
        n = int(np.flatnonzero(bad)[0]) + 1
        raise NotProportional(n, f"column {n} is not a rescaling")
    return rho


def eigen_residual(H: ZzmMatrix, Q) -> float:
    """Dense ``||H Q - Q diag(a)||_F``."""
    Q = as_dense(Q)
    if Q.shape != H.shape:
        raise DimMismatch(f"Q has shape {Q.shape}, H is {H.shape}")
    Hd = to_dense(H)
    return float(np.linalg.norm(Hd @ Q - Q * H.diag, "fro"))
