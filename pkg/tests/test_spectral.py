import numpy as np
import pytest

from zqh import oracle
from zqh.core import Orientation, build, structural_mask, to_dense, transpose
from zqh.errors import DegenerateSpectrum, DimTooSmall, NotProportional, OrientationMismatch, ZeroOddCoupling
from zqh.spectral import (
    SIGN_TABLE,
    EigenSystem,
    Normalization,
    adjacent_gap,
    eigen_residual,
    eigenvalues,
    eigenvectors_lemma_xy,
    eigenvectors_unit_diagonal,
    normalization_map,
)

from conftest import random_zzm

H2 = build([1, 3], [2])


def test_eigenvalues_are_the_diagonal():
    assert eigenvalues(build([1, 2, 3], [7, -1])).tolist() == [1, 2, 3]
    assert eigenvalues(build([4], [])).tolist() == [4]
    assert eigenvalues(build([5, 5, 7], [1, 1])).tolist() == [5, 5, 7]


@pytest.mark.parametrize(
    "a, gap, k",
    [([1, 2, 3], 1.0, 1), ([0, 1e-9, 5], 1e-9, 1), ([3, 3], 0.0, 1), ([0, 4, 4.5], 0.5, 2)],
)
def test_adjacent_gap(a, gap, k):
    rep = adjacent_gap(build(a, np.zeros(len(a) - 1)))
    assert rep.gap == pytest.approx(gap, rel=1e-12) and rep.index == k
    assert rep.relative_gap >= 0


def test_adjacent_gap_needs_two_levels():
    with pytest.raises(DimTooSmall):
        adjacent_gap(build([1], []))


def test_sign_table_frozen():
    assert SIGN_TABLE == {
        (Orientation.ZZM, True): 1.0,
        (Orientation.ZZM, False): -1.0,
        (Orientation.TZZM, True): -1.0,
        (Orientation.TZZM, False): 1.0,
    }


def test_zzm_two_level_eigenvectors():
    sys = eigenvectors_unit_diagonal(H2)
    Q = to_dense(sys.vectors)
    assert Q.tolist() == [[1, 0], [-1, 1]]
    assert sys.normalization is Normalization.UNIT_DIAGONAL
    # the oracle fixes the sign independently
    v = oracle.nullspace_vector(to_dense(H2), 1.0)
    assert np.allclose(v / v[0], Q[:, 0], rtol=0, atol=1e-15)


def test_tzzm_two_level_eigenvectors():
    sys = eigenvectors_unit_diagonal(transpose(H2))
    Q = to_dense(sys.vectors)
    assert Q.tolist() == [[1, 1], [0, 1]]
    v = oracle.nullspace_vector(to_dense(transpose(H2)), 3.0)
    assert np.allclose(v / v[1], Q[:, 1], rtol=0, atol=1e-15)


def test_diagonal_hamiltonian_gives_identity():
    H = build([1, 2, 3, 4], [0, 0, 0])
    sys = eigenvectors_unit_diagonal(H)
    assert np.array_equal(to_dense(sys.vectors), np.eye(4))
    assert eigen_residual(H, to_dense(sys.vectors)) == 0.0


def test_degenerate_spectrum_rejected():
    with pytest.raises(DegenerateSpectrum) as exc:
        eigenvectors_unit_diagonal(build([1, 2, 2, 5], [1, 1, 1]))
    assert exc.value.index == 2


@pytest.mark.parametrize("orientation", ["zzm", "tzzm"])
@pytest.mark.parametrize("dim", [1, 2, 3, 8, 15, 16])
def test_unit_diagonal_against_nullspace_oracle(rng, orientation, dim):
    H = random_zzm(rng, dim, orientation)
    sys = eigenvectors_unit_diagonal(H)
    Q = to_dense(sys.vectors)
    assert np.all(np.diag(Q) == 1.0)
    assert not np.any(Q[~structural_mask(dim, orientation)])
    Hd = to_dense(H)
    for n in range(dim):
        v = oracle.nullspace_vector(Hd, H.diag[n])
        v = v / v[n]
        assert np.max(np.abs(v - Q[:, n])) <= 1e-10 * np.max(np.abs(Q[:, n])), n
    bound = 1e-12 * np.linalg.norm(Hd) * np.linalg.norm(Q)
    assert eigen_residual(H, Q) <= bound


def test_lemma_xy_two_levels():
    sys = eigenvectors_lemma_xy(H2)
    Q = to_dense(sys.vectors)
    # x_1 = (a_1 - a_2) / c_1 = -1, x_2 = 1, y_1 = 1
    assert Q.tolist() == [[-1, 0], [1, 1]]
    assert sys.normalization is Normalization.LEMMA_XY


def test_lemma_xy_normalization_slots(rng):
    H = random_zzm(rng, 10)
    x, y = eigenvectors_lemma_xy(H).vectors.diag, eigenvectors_lemma_xy(H).vectors.off
    assert np.all(x[1::2] == 1.0)
    assert np.all(y[0::2] == 1.0)
    a, c = H.diag, H.off
    np.testing.assert_allclose(x[0::2], (a[0::2] - a[1::2]) / c[0::2], rtol=1e-15)
    # y_k for even k, written with 1-based k
    for k in range(2, 9, 2):
        expected = -(a[k] - a[k + 1]) * c[k - 1] / ((a[k - 1] - a[k]) * c[k])
        assert y[k - 1] == pytest.approx(expected, rel=1e-13)


@pytest.mark.parametrize("dim", [5, 9, 10])
def test_lemma_xy_residual(rng, dim):
    H = random_zzm(rng, dim)
    Q = to_dense(eigenvectors_lemma_xy(H).vectors)
    assert eigen_residual(H, Q) <= 1e-12 * np.linalg.norm(to_dense(H)) * np.linalg.norm(Q)


def test_lemma_xy_odd_dimension_last_column():
    H = build([1, 2, 4], [1, 3])
    Q = to_dense(eigenvectors_lemma_xy(H).vectors)
    assert Q[2, 2] == 1.0


def test_lemma_xy_zero_odd_coupling():
    with pytest.raises(ZeroOddCoupling) as exc:
        eigenvectors_lemma_xy(build([1, 3], [0]))
    assert exc.value.index == 1
    with pytest.raises(ZeroOddCoupling) as exc:
        eigenvectors_lemma_xy(build([1, 3, 4, 7], [1, 2, 0]))
    assert exc.value.index == 3
    # an even coupling may vanish
    eigenvectors_lemma_xy(build([1, 3, 4], [1, 0]))


def test_lemma_xy_orientation():
    with pytest.raises(OrientationMismatch):
        eigenvectors_lemma_xy(transpose(H2))


def test_normalization_map_identity(rng):
    sys = eigenvectors_unit_diagonal(random_zzm(rng, 6))
    assert np.array_equal(normalization_map(sys, sys), np.ones(6))


def test_normalization_map_two_levels():
    rho = normalization_map(eigenvectors_unit_diagonal(H2), eigenvectors_lemma_xy(H2))
    assert rho.tolist() == [-1.0, 1.0]


def test_normalization_map_reconstructs(rng):
    H = random_zzm(rng, 8)
    s1, s2 = eigenvectors_unit_diagonal(H), eigenvectors_lemma_xy(H)
    rho = normalization_map(s1, s2)
    Q1, Q2 = to_dense(s1.vectors), to_dense(s2.vectors)
    assert np.max(np.abs(Q1 * rho - Q2)) <= 1e-12 * np.max(np.abs(Q2))
    np.testing.assert_allclose(rho, s2.vectors.diag, rtol=1e-15)


def test_normalization_map_not_proportional():
    s1 = eigenvectors_unit_diagonal(H2)
    s2 = EigenSystem(H2, H2.diag, build([1, 1], [0.5]), Normalization.UNIT_DIAGONAL)
    with pytest.raises(NotProportional):
        normalization_map(s1, s2)


def test_eigen_residual_examples():
    assert eigen_residual(build([1, 2], [0]), np.eye(2)) == 0.0
    assert eigen_residual(build([0, 2], [1]), np.eye(2)) == 1.0
