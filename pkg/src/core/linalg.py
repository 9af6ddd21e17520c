"""
Dense complex linear-algebra kernels used by the precoders and phase solvers.

Matrices and vectors are numpy complex128 arrays. Problem sizes are small
(at most a few dozen), so everything is dense and direct.
"""

from __future__ import annotations

import warnings

import numpy as np
import numpy.typing as npt
import scipy.linalg

ComplexMatrix = npt.NDArray[np.complex128]
ComplexVector = npt.NDArray[np.complex128]

# Pivot magnitude below this fraction of max|entry| means singular
SINGULAR_RTOL = 1e-12


class LinalgError(Exception):
    """Base exception for linear-algebra failures."""


class SingularMatrixError(LinalgError):
    """Raised when a system matrix is numerically singular."""


class RankDeficientError(LinalgError):
    """Raised when a channel matrix has fewer than K independent columns."""


def hermitian(m: npt.ArrayLike) -> ComplexMatrix:
    """Conjugate transpose."""
    return np.conj(np.asarray(m)).T


def solve_linear(a: npt.ArrayLike, b: npt.ArrayLike) -> np.ndarray:
    """
    Solve a x = b by partial-pivot LU.

    ``b`` may be a vector or a matrix of right-hand sides.

    Raises:
        SingularMatrixError: if a pivot falls below 1e-12 * max|a|.
    """
    a = np.asarray(a, dtype=np.complex128)
    b = np.asarray(b, dtype=np.complex128)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"solve_linear needs a square matrix, got shape {a.shape}")

    scale = float(np.max(np.abs(a))) if a.size else 0.0
    if scale == 0.0:
        raise SingularMatrixError("zero matrix")

    with warnings.catch_warnings():
        warnings.simplefilter("ignore", scipy.linalg.LinAlgWarning)
        lu, piv = scipy.linalg.lu_factor(a, check_finite=False)
    pivots = np.abs(np.diag(lu))
    if float(np.min(pivots)) < SINGULAR_RTOL * scale:
        raise SingularMatrixError(
            f"pivot {float(np.min(pivots)):.3e} below {SINGULAR_RTOL:.0e} x max|a| = {scale:.3e}"
        )
    return scipy.linalg.lu_solve((lu, piv), b, check_finite=False)


def pseudo_inverse_tall(h: npt.ArrayLike) -> ComplexMatrix:
    """
    Left pseudo-inverse (h^H h)^{-1} h^H of a tall M x K matrix.

    Raises:
        RankDeficientError: if h^H h is numerically singular.
    """
    h = np.asarray(h, dtype=np.complex128)
    m, k = h.shape
    if m < k:
        raise ValueError(f"pseudo_inverse_tall needs M >= K, got {m} x {k}")
    h_herm = hermitian(h)
    try:
        return solve_linear(h_herm @ h, h_herm)
    except SingularMatrixError as e:
        raise RankDeficientError(f"rank(h) < {k}: {e}") from e


def max_eigenvalue_psd(a: npt.ArrayLike) -> float:
    """Largest eigenvalue of a Hermitian positive semi-definite matrix."""
    a = np.asarray(a, dtype=np.complex128)
    if a.size == 0:
        return 0.0
    if not np.allclose(a, hermitian(a), atol=1e-10 * max(1.0, float(np.max(np.abs(a))))):
        raise ValueError("max_eigenvalue_psd needs a Hermitian matrix")
    top = scipy.linalg.eigh(a, eigvals_only=True, subset_by_index=[a.shape[0] - 1, a.shape[0] - 1])
    return max(float(top[0]), 0.0)
