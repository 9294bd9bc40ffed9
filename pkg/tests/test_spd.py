import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import spd
from tcplda import _backend
from tcplda.errors import DimensionMismatch, NotPositiveDefinite
from tcplda.spd import cholesky, inverse_spd, is_positive_definite, logdet_spd, pivots_squared, symmetrize


def test_cholesky_identity(backend):
    np.testing.assert_array_equal(cholesky(np.eye(3)), np.eye(3))


def test_cholesky_diagonal(backend):
    np.testing.assert_allclose(cholesky(np.diag([4.0, 9.0])), np.diag([2.0, 3.0]), rtol=0, atol=0)


def test_cholesky_reconstructs_random_spd(backend):
    M = np.random.default_rng(42).standard_normal((5, 5))
    A = M.T @ M + np.eye(5)
    L = cholesky(A)
    assert np.all(np.triu(L, 1) == 0)
    assert np.abs(A - L @ L.T).max() <= 1e-10 * max(1.0, np.abs(A).max())


def test_cholesky_rejects_indefinite(backend):
    with pytest.raises(NotPositiveDefinite) as info:
        cholesky(np.array([[1.0, 2.0], [2.0, 1.0]]))
    assert info.value.pivot_index == 1


@pytest.mark.parametrize("bad", [np.zeros((2, 2)), np.array([[np.nan, 0.0], [0.0, 1.0]]), -np.eye(3)])
def test_cholesky_rejects_degenerate(backend, bad):
    with pytest.raises(NotPositiveDefinite):
        cholesky(bad)
    assert not is_positive_definite(bad)


def test_non_square_rejected():
    with pytest.raises(DimensionMismatch):
        cholesky(np.ones((2, 3)))


def test_inverse_trivial(backend):
    np.testing.assert_array_equal(inverse_spd(np.eye(4)), np.eye(4))
    np.testing.assert_allclose(inverse_spd(np.diag([2.0, 4.0])), np.diag([0.5, 0.25]), rtol=1e-15)


def test_inverse_multiplies_back(backend):
    A = spd(6, 7)
    inv = inverse_spd(A)
    assert np.array_equal(inv, inv.T)
    assert np.abs(A @ inv - np.eye(6)).max() <= 1e-9


def test_logdet_trivial(backend):
    assert logdet_spd(np.eye(5)) == 0.0
    assert logdet_spd(np.diag([math.e, math.e**2])) == pytest.approx(3.0, abs=1e-14)


def test_logdet_matches_eigenvalues(backend):
    A = spd(4, 11)
    expected = float(np.sum(np.log(np.linalg.eigvalsh(A))))
    assert logdet_spd(A) == pytest.approx(expected, abs=1e-9)


def test_symmetrize():
    np.testing.assert_array_equal(symmetrize(np.array([[1.0, 3.0], [1.0, 1.0]])), [[1.0, 2.0], [2.0, 1.0]])
    A = spd(3, 0)
    np.testing.assert_array_equal(symmetrize(A), A)
    R = symmetrize(np.random.default_rng(5).standard_normal((7, 7)))
    assert np.all(R - R.T == 0)


def test_pivots_squared_of_diagonal():
    np.testing.assert_allclose(pivots_squared(np.diag([3.0, 5.0])), [3.0, 5.0])


spd_inputs = st.tuples(st.integers(1, 12), st.integers(0, 2**32 - 1), st.floats(1e-3, 10.0))


@settings(max_examples=60, deadline=None)
@given(spd_inputs, st.sampled_from(_backend.available()))
def test_double_inverse_and_logdet_duality(args, name):
    d, seed, ridge = args
    previous = _backend.use(name)
    try:
        A = spd(d, seed, ridge)
        inv = inverse_spd(A)
        back = inverse_spd(inv)
        assert np.abs(back - A).max() <= 1e-8 * np.abs(A).max()
        assert abs(logdet_spd(A) + logdet_spd(inv)) <= 1e-8
    finally:
        _backend.use(previous)
