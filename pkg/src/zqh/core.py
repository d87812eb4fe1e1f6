"""Zig-zag matrices and their closed-form algebra.

A zig-zag matrix (ZZM) of order ``M`` carries a diagonal ``a`` (length M) and
couplings ``c`` (length M-1). With 1-based level numbering, ``c_k`` sits at
``(k+1, k)`` for odd ``k`` and at ``(k, k+1)`` for even ``k``::

    [[a1,  0,  0,  0, ...],
     [c1, a2, c2,  0, ...],
     [ 0,  0, a3,  0, ...],
     [ 0,  0, c3, a4, c4 ],
     ...]

The transposed variant (TZZM) uses the mirrored placement. Products,
inverses and integer powers stay inside the class and are computed in O(M)
from the parameter vectors alone.

Internally arrays are 0-based, so 1-based odd ``k`` corresponds to even
array index ``i = k - 1``.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .errors import (
    DimMismatch,
    LengthMismatch,
    NonFiniteEntry,
    OrientationMismatch,
    SingularMatrix,
)

__all__ = [
    "Orientation",
    "ZzmMatrix",
    "SINGULAR_TOL",
    "as_dense",
    "build",
    "identity",
    "to_dense",
    "transpose",
    "zzm_multiply",
    "zzm_inverse",
    "zzm_power",
    "sandwich_chain",
    "sandwich_diag",
    "sandwich_diag_squared",
    "structural_mask",
]

SINGULAR_TOL = 1e-12
# chain-vs-identity agreement, relative to the max-norm of the expected result
SANDWICH_TOL = 1e-12


class Orientation(enum.Enum):
    ZZM = "zzm"
    TZZM = "tzzm"

    @classmethod
    def coerce(cls, value) -> "Orientation":
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).lower())
        except ValueError:
            raise ValueError(f"unknown orientation {value!r}; expected 'zzm' or 'tzzm'") from None

    def flipped(self) -> "Orientation":
        return Orientation.TZZM if self is Orientation.ZZM else Orientation.ZZM


def _frozen_vector(values, name: str) -> np.ndarray:
    arr = np.array(values, dtype=np.float64, copy=True).reshape(-1)
    if not np.all(np.isfinite(arr)):
        bad = int(np.flatnonzero(~np.isfinite(arr))[0]) + 1
        raise NonFiniteEntry(f"{name}[{bad}] is not finite")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class ZzmMatrix:
    """Sparse ``M x M`` zig-zag matrix stored as its ``2M-1`` parameters.

    Instances are immutable; ``diag`` and ``off`` are read-only float arrays.
    """

    diag: np.ndarray
    off: np.ndarray
    orientation: Orientation = Orientation.ZZM

    def __post_init__(self):
        diag = _frozen_vector(self.diag, "a")
        off = _frozen_vector(self.off, "c")
        if diag.size < 1:
            raise LengthMismatch("a must have at least one entry")
        if off.size != diag.size - 1:
            raise LengthMismatch(
                f"length(c) = {off.size} but length(a) - 1 = {diag.size - 1}"
            )
        object.__setattr__(self, "diag", diag)
        object.__setattr__(self, "off", off)
        object.__setattr__(self, "orientation", Orientation.coerce(self.orientation))

    @property
    def dim(self) -> int:
        return self.diag.size

    @property
    def shape(self) -> tuple[int, int]:
        return (self.dim, self.dim)

    @property
    def T(self) -> "ZzmMatrix":
        return transpose(self)

    def to_dense(self) -> np.ndarray:
        return to_dense(self)

    def frobenius_norm(self) -> float:
        return float(np.sqrt(np.dot(self.diag, self.diag) + np.dot(self.off, self.off)))

    def __matmul__(self, other):
        if isinstance(other, ZzmMatrix):
            return zzm_multiply(self, other)
        return NotImplemented

    def __eq__(self, other):
        if not isinstance(other, ZzmMatrix):
            return NotImplemented
        return (
            self.orientation is other.orientation
            and np.array_equal(self.diag, other.diag)
            and np.array_equal(self.off, other.off)
        )

    __hash__ = None

    def __repr__(self):
        return (
            f"ZzmMatrix(diag={self.diag.tolist()!r}, off={self.off.tolist()!r}, "
            f"orientation={self.orientation.value!r})"
        )


def build(a, c, orientation=Orientation.ZZM) -> ZzmMatrix:
    """Build a zig-zag matrix from its diagonal ``a`` and couplings ``c``."""
    return ZzmMatrix(a, c, Orientation.coerce(orientation))


def identity(dim: int, orientation=Orientation.ZZM) -> ZzmMatrix:
    return ZzmMatrix(np.ones(dim), np.zeros(dim - 1), orientation)


def as_dense(x) -> np.ndarray:
    """Validate and return a finite 2-D float64 array."""
    arr = np.asarray(x, dtype=np.float64)
    if arr.ndim != 2:
        raise DimMismatch(f"expected a 2-D matrix, got ndim={arr.ndim}")
    if not np.all(np.isfinite(arr)):
        raise NonFiniteEntry("matrix contains NaN or Inf")
    return arr


def _off_positions(dim: int, orientation: Orientation):
    """Rows and columns (0-based) of the coupling slots ``c_1..c_{M-1}``."""
    i = np.arange(dim - 1)
    low = i % 2 == 0  # odd k: below the diagonal for ZZM
    rows = np.where(low, i + 1, i)
    cols = np.where(low, i, i + 1)
    if orientation is Orientation.TZZM:
        rows, cols = cols, rows
    return rows, cols


def to_dense(z: ZzmMatrix) -> np.ndarray:
    n = z.dim
    out = np.zeros((n, n))
    out[np.arange(n), np.arange(n)] = z.diag
    rows, cols = _off_positions(n, z.orientation)
    out[rows, cols] = z.off
    return out


def structural_mask(dim: int, orientation=Orientation.ZZM) -> np.ndarray:
    """Boolean mask of the ``2M-1`` positions a zig-zag matrix may occupy."""
    mask = np.eye(dim, dtype=bool)
    rows, cols = _off_positions(dim, Orientation.coerce(orientation))
    mask[rows, cols] = True
    return mask


def transpose(z: ZzmMatrix) -> ZzmMatrix:
    return ZzmMatrix(z.diag, z.off, z.orientation.flipped())


def _check_pair(a: ZzmMatrix, b: ZzmMatrix):
    if a.dim != b.dim:
        raise DimMismatch(f"dimensions differ: {a.dim} vs {b.dim}")
    if a.orientation is not b.orientation:
        raise OrientationMismatch(
            f"cannot multiply {a.orientation.value} by {b.orientation.value}"
        )


def _zzm_product_params(a, c, b, d):
    u = a * b
    v = np.empty_like(c)
    # 1-based odd k (even array index): v_k = c_k b_k + a_{k+1} d_k
    v[0::2] = c[0::2] * b[:-1][0::2] + a[1:][0::2] * d[0::2]
    # 1-based even k: v_k = a_k d_k + c_k b_{k+1}
    v[1::2] = a[:-1][1::2] * d[1::2] + c[1::2] * b[1:][1::2]
    return u, v


def zzm_multiply(A: ZzmMatrix, B: ZzmMatrix) -> ZzmMatrix:
    """Closed-form product of two zig-zag matrices of equal orientation."""
    _check_pair(A, B)
    if A.orientation is Orientation.TZZM:
        # A B = (B^T A^T)^T with both transposes in ZZM form
        return transpose(zzm_multiply(transpose(B), transpose(A)))
    u, v = _zzm_product_params(A.diag, A.off, B.diag, B.off)
    return ZzmMatrix(u, v, Orientation.ZZM)


def _check_invertible(a: np.ndarray):
    scale = np.max(np.abs(a))
    small = np.abs(a) <= SINGULAR_TOL * scale
    if scale == 0.0 or np.any(small):
        j = int(np.flatnonzero(small)[0]) + 1 if scale > 0 else 1
        raise SingularMatrix(j, f"diagonal entry a_{j} is zero (relative tol {SINGULAR_TOL:g})")


def zzm_inverse(A: ZzmMatrix) -> ZzmMatrix:
    """Closed-form inverse; the same formula serves both orientations."""
    a, c = A.diag, A.off
    _check_invertible(a)
    return ZzmMatrix(1.0 / a, -c / (a[:-1] * a[1:]), A.orientation)


def zzm_power(A: ZzmMatrix, n: int) -> ZzmMatrix:
    """Integer power by repeated squaring of closed-form products."""
    n = int(n)
    if n < 0:
        return zzm_power(zzm_inverse(A), -n)
    result = identity(A.dim, A.orientation)
    base = A
    while n:
        if n & 1:
            result = zzm_multiply(result, base)
        n >>= 1
        if n:
            base = zzm_multiply(base, base)
    return result


def sandwich_chain(A: ZzmMatrix, n: int = 1) -> ZzmMatrix:
    """Evaluate ``D^n A^(-n) D^n`` with ``D`` the diagonal part of ``A``.

    Every factor is a closed-form product; nothing is densified.
    """
    d = ZzmMatrix(A.diag, np.zeros(A.dim - 1), A.orientation)
    dn = zzm_power(d, n)
    return zzm_multiply(zzm_multiply(dn, zzm_power(A, -n)), dn)


def _assert_same(chain: ZzmMatrix, expected: ZzmMatrix, label: str):
    scale = max(np.max(np.abs(expected.diag)), np.max(np.abs(expected.off), initial=0.0))
    err = max(
        np.max(np.abs(chain.diag - expected.diag)),
        np.max(np.abs(chain.off - expected.off), initial=0.0),
    )
    if err > SANDWICH_TOL * scale:
        raise ArithmeticError(f"{label}: chain deviates from closed form by {err:.3e}")


def sandwich_diag(A: ZzmMatrix) -> ZzmMatrix:
    """``D A^-1 D`` with ``D = diag(a)``, which equals ``H(a, -c)``."""
    expected = ZzmMatrix(A.diag, -A.off, A.orientation)
    _assert_same(sandwich_chain(A, 1), expected, "sandwich_diag")
    return expected


def sandwich_diag_squared(A: ZzmMatrix) -> ZzmMatrix:
    """``D^2 A^-2 D^2``, equal to ``H(a^2, -c_k (a_k + a_{k+1}))``."""
    a, c = A.diag, A.off
    expected = ZzmMatrix(a * a, -c * (a[:-1] + a[1:]), A.orientation)
    _assert_same(sandwich_chain(A, 2), expected, "sandwich_diag_squared")
    return expected
