"""Tests for the dense linear-algebra kernels."""

import numpy as np
import pytest

from src.core.linalg import (
    RankDeficientError,
    SingularMatrixError,
    hermitian,
    max_eigenvalue_psd,
    pseudo_inverse_tall,
    solve_linear,
)
from tests.conftest import crandn


def test_hermitian_is_conjugate_transpose(rng):
    a = crandn(rng, 3, 2)
    assert np.array_equal(hermitian(a), np.conj(a).T)


def test_solve_linear_vector_and_matrix_rhs(rng):
    a = crandn(rng, 5, 5)
    b = crandn(rng, 5)
    x = solve_linear(a, b)
    assert np.allclose(a @ x, b, atol=1e-10)

    bm = crandn(rng, 5, 3)
    xm = solve_linear(a, bm)
    assert xm.shape == (5, 3)
    assert np.allclose(a @ xm, bm, atol=1e-10)


def test_solve_linear_singular_raises():
    with pytest.raises(SingularMatrixError):
        solve_linear(np.array([[1.0, 2.0], [2.0, 4.0]]), np.ones(2))


def test_solve_linear_zero_matrix_raises():
    with pytest.raises(SingularMatrixError):
        solve_linear(np.zeros((3, 3)), np.ones(3))


def test_solve_linear_rejects_non_square():
    with pytest.raises(ValueError):
        solve_linear(np.ones((2, 3)), np.ones(2))


def test_pseudo_inverse_matches_numpy(rng):
    h = crandn(rng, 6, 3)
    pinv = pseudo_inverse_tall(h)
    assert np.allclose(pinv @ h, np.eye(3), atol=1e-10)
    assert np.allclose(pinv, np.linalg.pinv(h), atol=1e-10)


def test_pseudo_inverse_rank_deficient(rng):
    col = crandn(rng, 4, 1)
    with pytest.raises(RankDeficientError):
        pseudo_inverse_tall(np.hstack([col, col]))


def test_max_eigenvalue_matches_eigvalsh(rng):
    x = crandn(rng, 5, 5)
    a = x @ hermitian(x)
    assert max_eigenvalue_psd(a) == pytest.approx(float(np.linalg.eigvalsh(a)[-1]), rel=1e-10)


def test_max_eigenvalue_rejects_non_hermitian():
    with pytest.raises(ValueError):
        max_eigenvalue_psd(np.array([[1.0, 2.0], [0.0, 1.0]]))


def test_max_eigenvalue_of_zero_matrix():
    assert max_eigenvalue_psd(np.zeros((4, 4))) == 0.0


def test_max_eigenvalue_bounds_rayleigh_quotient(rng):
    x = crandn(rng, 6, 6)
    a = x @ hermitian(x)
    top = max_eigenvalue_psd(a)
    for _ in range(100):
        v = crandn(rng, 6)
        v = v / np.linalg.norm(v)
        assert top >= float(np.real(np.vdot(v, a @ v))) - 1e-8
