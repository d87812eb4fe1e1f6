"""Independent dense linear algebra used to cross-check the closed forms.

Nothing in here knows about zig-zag structure: every routine takes plain
square arrays. The kernels are explicit loops (triple-loop product,
Gauss-Jordan with partial pivoting, elimination with complete pivoting,
Cholesky) compiled with numba, so their cost grows as O(M^3) without
BLAS shortcuts.
"""

from __future__ import annotations

from dataclasses import dataclass

import numba
import numpy as np

from .core import as_dense
from .errors import (
    AmbiguousNullspace,
    DimMismatch,
    DimTooLarge,
    NoNullspace,
    NotPositiveDefinite,
    NotSymmetric,
    SingularMatrix,
)

__all__ = [
    "LinearSolveReport",
    "CHAR_POLY_MAX_DIM",
    "dense_multiply",
    "dense_inverse",
    "determinant",
    "nullspace_vector",
    "cholesky",
    "char_poly_check",
    "frobenius",
    "max_norm",
]

CHAR_POLY_MAX_DIM = 8
SYMMETRY_TOL = 1e-13
NULLSPACE_TOL = 1e-10

_EPS = np.finfo(np.float64).eps


@dataclass(frozen=True)
class LinearSolveReport:
    solution: np.ndarray
    residual: float
    growth: float


@numba.njit(cache=True)
def _matmul_kernel(A, B):
    n, m = A.shape
    p = B.shape[1]
    C = np.zeros((n, p))
    for i in range(n):
        for j in range(p):
            s = 0.0
            for k in range(m):
                s += A[i, k] * B[k, j]
            C[i, j] = s
    return C


@numba.njit(cache=True)
def _gauss_jordan_kernel(A):
    """Return (inverse, failing pivot (1-based, 0 if none), growth factor)."""
    n = A.shape[0]
    W = np.zeros((n, 2 * n))
    amax = 0.0
    for i in range(n):
        for j in range(n):
            W[i, j] = A[i, j]
            if abs(A[i, j]) > amax:
                amax = abs(A[i, j])
        W[i, n + i] = 1.0
    tol = n * 2.220446049250313e-16 * amax
    wmax = amax
    for k in range(n):
        piv = k
        best = abs(W[k, k])
        for i in range(k + 1, n):
            if abs(W[i, k]) > best:
                best = abs(W[i, k])
                piv = i
        if best <= tol:
            return W[:, n:], k + 1, 0.0
        if piv != k:
            for j in range(2 * n):
                tmp = W[k, j]
                W[k, j] = W[piv, j]
                W[piv, j] = tmp
        inv_p = 1.0 / W[k, k]
        for j in range(2 * n):
            W[k, j] *= inv_p
        for i in range(n):
            if i != k:
                f = W[i, k]
                if f != 0.0:
                    for j in range(2 * n):
                        W[i, j] -= f * W[k, j]
                        if j < n and abs(W[i, j]) > wmax:
                            wmax = abs(W[i, j])
    growth = wmax / amax if amax > 0 else 1.0
    return W[:, n:].copy(), 0, growth


@numba.njit(cache=True)
def _determinant_kernel(A):
    n = A.shape[0]
    W = A.copy()
    det = 1.0
    for k in range(n):
        piv = k
        best = abs(W[k, k])
        for i in range(k + 1, n):
            if abs(W[i, k]) > best:
                best = abs(W[i, k])
                piv = i
        if best == 0.0:
            return 0.0
        if piv != k:
            for j in range(n):
                tmp = W[k, j]
                W[k, j] = W[piv, j]
                W[piv, j] = tmp
            det = -det
        det *= W[k, k]
        for i in range(k + 1, n):
            f = W[i, k] / W[k, k]
            if f != 0.0:
                for j in range(k, n):
                    W[i, j] -= f * W[k, j]
    return det


@numba.njit(cache=True)
def _cholesky_kernel(S):
    n = S.shape[0]
    L = np.zeros((n, n))
    for j in range(n):
        s = S[j, j]
        for k in range(j):
            s -= L[j, k] * L[j, k]
        if not s > 0.0:
            return L, j + 1
        L[j, j] = np.sqrt(s)
        for i in range(j + 1, n):
            t = S[i, j]
            for k in range(j):
                t -= L[i, k] * L[j, k]
            L[i, j] = t / L[j, j]
    return L, 0


@numba.njit(cache=True)
def _nullspace_kernel(A, lam, rank_tol):
    """Complete-pivoting elimination of ``A - lam I``; the last column is free.

    Returns (vector, number of pivots at or below rank_tol among the first
    n-1 steps).
    """
    n = A.shape[0]
    W = A.copy()
    for i in range(n):
        W[i, i] -= lam
    perm = np.arange(n)
    small = 0
    for k in range(n - 1):
        pr = k
        pc = k
        best = -1.0
        for i in range(k, n):
            for j in range(k, n):
                if abs(W[i, j]) > best:
                    best = abs(W[i, j])
                    pr = i
                    pc = j
        if best <= rank_tol:
            small += 1
        if pr != k:
            for j in range(n):
                tmp = W[k, j]
                W[k, j] = W[pr, j]
                W[pr, j] = tmp
        if pc != k:
            for i in range(n):
                tmp = W[i, k]
                W[i, k] = W[i, pc]
                W[i, pc] = tmp
            t = perm[k]
            perm[k] = perm[pc]
            perm[pc] = t
        if best == 0.0:
            continue
        for i in range(k + 1, n):
            f = W[i, k] / W[k, k]
            if f != 0.0:
                W[i, k] = 0.0
                for j in range(k + 1, n):
                    W[i, j] -= f * W[k, j]
    y = np.zeros(n)
    y[n - 1] = 1.0
    for k in range(n - 2, -1, -1):
        if W[k, k] == 0.0:
            continue
        s = 0.0
        for j in range(k + 1, n):
            s += W[k, j] * y[j]
        y[k] = -s / W[k, k]
    x = np.zeros(n)
    for j in range(n):
        x[perm[j]] = y[j]
    return x, small


def frobenius(A) -> float:
    return float(np.sqrt(np.sum(np.square(A))))


def max_norm(A) -> float:
    return float(np.max(np.abs(A), initial=0.0))


def _square(A, name="A") -> np.ndarray:
    A = as_dense(A)
    if A.shape[0] != A.shape[1]:
        raise DimMismatch(f"{name} must be square, got {A.shape}")
    return np.ascontiguousarray(A)


def dense_multiply(A, B) -> np.ndarray:
    A = np.ascontiguousarray(as_dense(A))
    B = np.ascontiguousarray(as_dense(B))
    if A.shape[1] != B.shape[0]:
        raise DimMismatch(f"inner dimensions differ: {A.shape} x {B.shape}")
    return _matmul_kernel(A, B)


def dense_inverse(A) -> LinearSolveReport:
    """Gauss-Jordan inverse with partial pivoting.

    The residual ``max|A A^-1 - I|`` is recomputed from the original input.
    """
    A = _square(A)
    inv, fail, growth = _gauss_jordan_kernel(A)
    if fail:
        raise SingularMatrix(fail, f"zero pivot at elimination step {fail}")
    residual = max_norm(_matmul_kernel(A, inv) - np.eye(A.shape[0]))
    return LinearSolveReport(inv, residual, float(growth))


def determinant(A) -> float:
    return float(_determinant_kernel(_square(A)))


def nullspace_vector(A, lam: float) -> np.ndarray:
    """Unit vector spanning the kernel of ``A - lam I``.

    The sign is fixed so that the first entry that is not negligible is
    positive.
    """
    A = _square(A)
    scale = frobenius(A)
    floor = NULLSPACE_TOL * scale if scale > 0 else NULLSPACE_TOL
    x, small = _nullspace_kernel(A, float(lam), floor)
    if small:
        raise AmbiguousNullspace(
            f"A - {lam!r} I has {small + 1} (near-)zero pivots; nullity exceeds 1"
        )
    x = x / np.linalg.norm(x)
    residual = np.linalg.norm(A @ x - lam * x)
    if not residual <= floor:
        raise NoNullspace(f"residual {residual:.3e} above floor {floor:.3e}")
    lead = np.flatnonzero(np.abs(x) > 1e-12)
    if lead.size and x[lead[0]] < 0:
        x = -x
    return x


def cholesky(S) -> np.ndarray:
    """Lower-triangular ``L`` with ``L L^T = S``."""
    S = _square(S, "S")
    scale = max_norm(S)
    if max_norm(S - S.T) > SYMMETRY_TOL * max(scale, 1.0):
        raise NotSymmetric("matrix is not symmetric")
    L, fail = _cholesky_kernel(S)
    if fail:
        raise NotPositiveDefinite(fail)
    return L


def char_poly_check(A, roots) -> float:
    """Largest normalized ``|det(A - r I)|`` over the candidate roots.

    The normalization is ``max(1, ||A||_inf)^M``. Only small matrices are
    accepted because determinants scale as entries^M.
    """
    A = _square(A)
    n = A.shape[0]
    if n > CHAR_POLY_MAX_DIM:
        raise DimTooLarge(f"char_poly_check supports M <= {CHAR_POLY_MAX_DIM}, got {n}")
    norm = max(1.0, float(np.max(np.sum(np.abs(A), axis=1))))
    eye = np.eye(n)
    worst = 0.0
    for r in np.asarray(roots, dtype=np.float64).reshape(-1):
        worst = max(worst, abs(determinant(A - r * eye)))
    return worst / norm**n
