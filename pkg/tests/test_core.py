import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from zqh import oracle
from zqh.core import (
    Orientation,
    ZzmMatrix,
    build,
    identity,
    sandwich_chain,
    sandwich_diag,
    sandwich_diag_squared,
    structural_mask,
    to_dense,
    transpose,
    zzm_inverse,
    zzm_multiply,
    zzm_power,
)
from zqh.errors import (
    DimMismatch,
    LengthMismatch,
    NonFiniteEntry,
    OrientationMismatch,
    SingularMatrix,
)

from conftest import random_zzm

A = build([1, 2, 3], [4, 5])


def test_build_placement():
    assert to_dense(A).tolist() == [[1, 0, 0], [4, 2, 5], [0, 0, 3]]


def test_build_single_level():
    assert to_dense(build([7], [])).tolist() == [[7]]


def test_build_transposed_placement():
    T = build([1, 2, 3], [4, 5], "tzzm")
    assert to_dense(T).tolist() == [[1, 4, 0], [0, 2, 0], [0, 5, 3]]
    assert np.array_equal(to_dense(T), to_dense(A).T)


def test_zero_matrix():
    assert not np.any(to_dense(build([0, 0], [0])))


def test_five_level_rows():
    D = to_dense(build([1, 2, 3, 4, 5], [9, 8, 7, 6]))
    assert D[3, 2] == 7 and D[3, 4] == 6
    assert np.count_nonzero(D) == 9


@pytest.mark.parametrize("a, c", [([1, 2, 3], [4]), ([1, 2], [1, 2]), ([], [])])
def test_build_length_mismatch(a, c):
    with pytest.raises(LengthMismatch):
        build(a, c)


@pytest.mark.parametrize("bad", [np.nan, np.inf, -np.inf])
def test_build_rejects_non_finite(bad):
    with pytest.raises(NonFiniteEntry):
        build([1.0, bad], [0.0])
    with pytest.raises(NonFiniteEntry):
        build([1.0, 2.0], [bad])


def test_instances_are_immutable():
    with pytest.raises(ValueError):
        A.diag[0] = 5.0
    with pytest.raises(AttributeError):
        A.diag = np.zeros(3)


def test_structure_odd_rows_even_columns(rng):
    D = to_dense(random_zzm(rng, 11))
    for j in range(0, 11, 2):  # 1-based odd rows
        assert np.count_nonzero(D[j]) <= 1
    for j in range(1, 11, 2):  # 1-based even columns
        assert np.count_nonzero(D[:, j]) <= 1


def test_transpose():
    T = transpose(A)
    assert T.orientation is Orientation.TZZM
    assert np.array_equal(T.diag, A.diag) and np.array_equal(T.off, A.off)
    assert transpose(T) == A


def test_transpose_dense_seeded(rng):
    Z = random_zzm(rng, 7)
    assert np.array_equal(to_dense(transpose(Z)), to_dense(Z).T)


def test_multiply_worked_example():
    P = zzm_multiply(A, build([6, 7, 8], [9, 10]))
    assert P.diag.tolist() == [6, 14, 24]
    assert P.off.tolist() == [42, 60]
    assert to_dense(P)[1].tolist() == [42, 14, 60]


def test_multiply_identity():
    assert zzm_multiply(A, identity(3)) == A
    assert A @ identity(3) == A


def test_multiply_rejects_mixed():
    with pytest.raises(OrientationMismatch):
        zzm_multiply(A, transpose(A))
    with pytest.raises(DimMismatch):
        zzm_multiply(A, identity(4))


dims = st.integers(min_value=1, max_value=24)
seeds = st.integers(min_value=0, max_value=2**32 - 1)


@settings(max_examples=150, deadline=None)
@given(dims, seeds, st.sampled_from(["zzm", "tzzm"]))
def test_product_matches_dense(dim, seed, orientation):
    rng = np.random.default_rng(seed)
    X = random_zzm(rng, dim, orientation, min_gap=0)
    Y = random_zzm(rng, dim, orientation, min_gap=0)
    P = to_dense(zzm_multiply(X, Y))
    R = oracle.dense_multiply(to_dense(X), to_dense(Y))
    mask = structural_mask(dim, orientation)
    assert not np.any(R[~mask])
    assert not np.any(P[~mask])
    np.testing.assert_allclose(P, R, rtol=1e-13, atol=0)


@settings(max_examples=60, deadline=None)
@given(dims, seeds)
def test_transpose_of_product(dim, seed):
    rng = np.random.default_rng(seed)
    X, Y = random_zzm(rng, dim, min_gap=0), random_zzm(rng, dim, min_gap=0)
    lhs = to_dense(transpose(zzm_multiply(X, Y)))
    rhs = to_dense(zzm_multiply(transpose(Y), transpose(X)))
    np.testing.assert_allclose(lhs, rhs, rtol=1e-13, atol=0)


def test_inverse_worked_example():
    inv = zzm_inverse(A)
    np.testing.assert_allclose(inv.diag, [1, 1 / 2, 1 / 3], rtol=1e-15)
    np.testing.assert_allclose(inv.off, [-2, -5 / 6], rtol=1e-15)
    ref = oracle.dense_inverse(to_dense(A)).solution
    np.testing.assert_allclose(to_dense(inv), ref, rtol=1e-14, atol=1e-15)


def test_inverse_diagonal():
    inv = zzm_inverse(build([2, 4, -8], [0, 0]))
    assert inv.diag.tolist() == [0.5, 0.25, -0.125]
    assert not np.any(inv.off)


def test_inverse_singular_index():
    with pytest.raises(SingularMatrix) as exc:
        zzm_inverse(build([1, 0, 3], [4, 5]))
    assert exc.value.index == 2


def test_inverse_transposed_is_transpose_of_inverse(rng):
    Z = random_zzm(rng, 9, min_abs=0.1)
    assert zzm_inverse(transpose(Z)) == transpose(zzm_inverse(Z))


def test_power_zero_and_square():
    assert zzm_power(A, 0) == identity(3)
    sq = zzm_power(A, 2)
    assert sq.diag.tolist() == [1, 4, 9]
    assert sq.off.tolist() == [12, 25]
    assert np.array_equal(to_dense(sq), oracle.dense_multiply(to_dense(A), to_dense(A)))


@pytest.mark.parametrize("n", [1, 3, 5, -1, -2, -3])
def test_power_matches_dense(rng, n):
    Z = random_zzm(rng, 10, min_abs=0.5)
    Zd = to_dense(Z)
    base = Zd if n > 0 else oracle.dense_inverse(Zd).solution
    ref = np.eye(10)
    for _ in range(abs(n)):
        ref = oracle.dense_multiply(ref, base)
    got = to_dense(zzm_power(Z, n))
    assert np.max(np.abs(got - ref)) <= 1e-11 * np.max(np.abs(ref))


def test_power_negative_singular():
    with pytest.raises(SingularMatrix):
        zzm_power(build([1, 0], [1]), -1)


def test_inverse_residual_seeded(rng):
    for _ in range(50):
        Z = random_zzm(rng, int(rng.integers(1, 40)), min_abs=0.1)
        P = zzm_multiply(zzm_power(Z, -1), Z)
        err = max(np.max(np.abs(P.diag - 1)), np.max(np.abs(P.off), initial=0))
        assert err <= 1e-12


def test_sandwich_worked_example():
    S = sandwich_diag(A)
    assert S == build([1, 2, 3], [-4, -5])
    chain = to_dense(sandwich_chain(A, 1))
    assert chain[1, 0] == pytest.approx(-4, rel=1e-15)
    assert chain[1, 2] == pytest.approx(-5, rel=1e-15)


def test_sandwich_diagonal_input():
    D = build([2, 3, 5], [0, 0])
    assert sandwich_diag(D) == ZzmMatrix([2, 3, 5], [-0.0, -0.0])
    assert to_dense(sandwich_diag_squared(D)).tolist() == np.diag([4, 9, 25]).tolist()


def test_sandwich_dense_chain(rng):
    Z = random_zzm(rng, 9, min_abs=0.1)
    Zd = to_dense(Z)
    Dd = np.diag(Z.diag)
    chain = Dd @ oracle.dense_inverse(Zd).solution @ Dd
    np.testing.assert_allclose(to_dense(sandwich_diag(Z)), chain, rtol=0, atol=1e-13 * np.max(np.abs(chain)))
    np.testing.assert_allclose(sandwich_diag(Z).off, -Z.off, rtol=1e-13)


def test_sandwich_squared_worked_example():
    S = sandwich_diag_squared(A)
    assert S.diag.tolist() == [1, 4, 9]
    assert S.off.tolist() == [-12, -25]


def test_sandwich_squared_dense_chain(rng):
    Z = random_zzm(rng, 12, min_abs=0.1)
    Zd = to_dense(Z)
    D2 = np.diag(Z.diag**2)
    inv = oracle.dense_inverse(Zd).solution
    chain = D2 @ inv @ inv @ D2
    got = to_dense(sandwich_diag_squared(Z))
    assert np.max(np.abs(got - chain)) <= 1e-12 * np.max(np.abs(chain))


def test_sandwich_singular():
    with pytest.raises(SingularMatrix):
        sandwich_diag(build([1, 0], [1]))
