"""
Transmit precoders for fixed phase shifts.

Channels are passed as a K x M array whose row k is the combined channel h_k
(so the user sees h_k^H w). Provides SINR evaluation, MRT, zero-forcing with
SINR-tight powers, and the power-minimizing MMSE precoder obtained from the
uplink-downlink duality fixed point.
"""

from __future__ import annotations

import math

import numpy as np
from scipy.optimize import root

from src.core.linalg import (
    RankDeficientError,
    SingularMatrixError,
    pseudo_inverse_tall,
    solve_linear,
)
from src.schemas.solver import Precoder, SinrSpec
from src.utils.logger import log_debug

DEFAULT_MMSE_TOL = 1e-10
DEFAULT_MMSE_MAX_ITER = 500
# Substitution steps between root-finder attempts
MMSE_PLAIN_STEPS = 50


class PrecodingError(Exception):
    """Base exception for precoder construction failures."""


class ZeroChannelError(PrecodingError):
    """Raised when MRT is asked to align with an all-zero channel."""


class NotConvergedError(PrecodingError):
    """Raised when the duality fixed point does not settle within max_iter."""

    def __init__(self, message: str, lambdas: np.ndarray | None = None):
        super().__init__(message)
        self.lambdas = lambdas


class InfeasibleError(PrecodingError):
    """Raised when the SINR targets cannot be met (negative power or singular Q)."""


class MmseResult:
    """MMSE precoder plus the converged dual variables and iteration count."""

    __slots__ = ("precoder", "lambdas", "iterations")

    def __init__(self, precoder: Precoder, lambdas: np.ndarray, iterations: int):
        self.precoder = precoder
        self.lambdas = lambdas
        self.iterations = iterations


def _as_rows(h: np.ndarray) -> np.ndarray:
    h = np.asarray(h, dtype=np.complex128)
    return h[np.newaxis, :] if h.ndim == 1 else h


def sinr(h: np.ndarray, w: Precoder, spec: SinrSpec) -> np.ndarray:
    """
    Per-user SINR |h_k^H w_k|^2 / (sum_{j != k} |h_k^H w_j|^2 + sigma_k^2).

    Args:
        h: K x M combined channels (row k is h_k)
        w: Precoder with M x K matrix
        spec: SINR targets and noise powers

    Returns:
        Length-K array of linear SINRs.
    """
    h = _as_rows(h)
    gains = np.abs(np.conj(h) @ w.w) ** 2
    signal = np.diag(gains)
    interference = np.sum(gains, axis=1) - signal
    return signal / (interference + spec.sigma2())


def mrt(h: np.ndarray, gamma: float, sigma2: float) -> Precoder:
    """
    Maximum-ratio transmission w = sqrt(P) h / ||h|| with P = gamma sigma^2 / ||h||^2.

    Raises:
        ZeroChannelError: if ||h|| == 0.
    """
    h = np.asarray(h, dtype=np.complex128).reshape(-1)
    gain = float(np.real(np.vdot(h, h)))
    if gain == 0.0:
        raise ZeroChannelError("MRT on an all-zero channel")
    power = gamma * sigma2 / gain
    w = math.sqrt(power) * h / math.sqrt(gain)
    return Precoder(w=w.reshape(-1, 1), total_power=power)


def zf(h: np.ndarray, spec: SinrSpec) -> Precoder:
    """
    Zero-forcing precoder W = H (H^H H)^{-1} P^{1/2} with p_k = sigma_k^2 gamma_k.

    Args:
        h: K x M combined channels, M >= K
        spec: SINR targets and noise powers

    Raises:
        RankDeficientError: if rank(H) < K.
    """
    rows = _as_rows(h)
    big_h = rows.T  # M x K, columns h_k
    pinv = pseudo_inverse_tall(big_h)  # K x M, equals (H^H H)^{-1} H^H
    p = spec.gamma() * spec.sigma2()
    w = np.conj(pinv).T * np.sqrt(p)[np.newaxis, :]
    return Precoder.from_matrix(w)


def zf_total_power(h: np.ndarray, spec: SinrSpec) -> float:
    """tr(P (H^H H)^{-1}) without forming W. Raises RankDeficientError."""
    rows = _as_rows(h)
    gram = np.conj(rows) @ rows.T  # (H^H H)(k, j) = h_k^H h_j
    p = spec.gamma() * spec.sigma2()
    try:
        inv_diag = np.real(np.diag(solve_linear(gram, np.eye(gram.shape[0], dtype=np.complex128))))
    except SingularMatrixError as e:
        raise RankDeficientError(str(e)) from e
    if np.any(inv_diag <= 0):
        raise RankDeficientError("non-positive diagonal in (H^H H)^{-1}")
    return float(np.sum(p * inv_diag))


def _duality_matrix(rows: np.ndarray, lambdas: np.ndarray, sigma2: np.ndarray) -> np.ndarray:
    """I_M + sum_i (lambda_i / sigma_i^2) h_i h_i^H."""
    m = rows.shape[1]
    weights = lambdas / sigma2
    return np.eye(m, dtype=np.complex128) + (rows.T * weights[np.newaxis, :]) @ np.conj(rows)


def _dual_update(rows: np.ndarray, lambdas: np.ndarray, gamma: np.ndarray, sigma2: np.ndarray) -> np.ndarray:
    """One application of lambda_k <- sigma_k^2 / ((1 + 1/gamma_k) h_k^H T(lambda)^{-1} h_k)."""
    t = _duality_matrix(rows, lambdas, sigma2)
    try:
        t_inv_h = solve_linear(t, rows.T)  # M x K, column k = T^{-1} h_k
    except SingularMatrixError as e:
        raise InfeasibleError(f"duality matrix singular: {e}") from e
    quad = np.real(np.sum(np.conj(rows.T) * t_inv_h, axis=0))
    return sigma2 / ((1.0 + 1.0 / gamma) * quad)


def _residual(rows: np.ndarray, lambdas: np.ndarray, gamma: np.ndarray, sigma2: np.ndarray) -> float:
    """Max relative change of one fixed-point step from lambdas."""
    updated = _dual_update(rows, lambdas, gamma, sigma2)
    return float(np.max(np.abs(updated - lambdas) / np.maximum(np.abs(updated), 1e-300)))


def _polish_dual(
    rows: np.ndarray,
    lambdas: np.ndarray,
    gamma: np.ndarray,
    sigma2: np.ndarray,
    tol: float,
) -> tuple[np.ndarray | None, int]:
    """
    Solve the fixed-point equations in log(lambda) with a hybrid Newton method.

    Returns (lambdas, evaluations); lambdas is None when the equations cannot
    be evaluated or the result is not finite. The caller checks the residual.
    """
    evaluations = 0

    def equations(x: np.ndarray) -> np.ndarray:
        nonlocal evaluations
        evaluations += 1
        with np.errstate(over="ignore", divide="ignore", invalid="ignore"):
            return x - np.log(_dual_update(rows, np.exp(x), gamma, sigma2))

    try:
        solution = root(equations, np.log(lambdas), method="hybr", options={"xtol": tol})
    except (InfeasibleError, ValueError):
        return None, evaluations
    with np.errstate(over="ignore"):
        candidate = np.exp(solution.x)
    if not np.all(np.isfinite(candidate)) or np.any(candidate <= 0):
        return None, evaluations
    return candidate, evaluations


def mmse(
    h: np.ndarray,
    spec: SinrSpec,
    tol: float = DEFAULT_MMSE_TOL,
    max_iter: int = DEFAULT_MMSE_MAX_ITER,
    lambdas0: np.ndarray | None = None,
) -> MmseResult:
    """
    Power-minimizing precoder under SINR constraints via the duality fixed point.

    Iterates lambda_k = sigma_k^2 / ((1 + 1/gamma_k) h_k^H T(lambda)^{-1} h_k)
    with T = I + sum_i (lambda_i/sigma_i^2) h_i h_i^H, then takes directions
    T^{-1} h_k (normalized, h_k^H w_k real nonnegative) and powers p = Q^{-1} sigma^2.

    Successive substitution contracts slowly at high SINR targets on correlated
    channels, so every MMSE_PLAIN_STEPS plain steps the equations are also
    handed to scipy's hybrid root finder in log(lambda). A root-finder result
    is kept only when its residual beats the last substitution step.

    Args:
        h: K x M combined channels
        spec: SINR targets and noise powers
        tol: Max relative change of lambda at convergence
        max_iter: Cap on substitution steps
        lambdas0: Warm start; defaults to gamma_k sigma_k^2 / ||h_k||^2

    Raises:
        NotConvergedError: if the fixed point is not reached.
        InfeasibleError: if Q is singular or some p_k < 0.
    """
    rows = _as_rows(h)
    k = rows.shape[0]
    gamma = spec.gamma()
    sigma2 = spec.sigma2()
    norms = np.real(np.sum(np.abs(rows) ** 2, axis=1))
    if np.any(norms == 0):
        raise InfeasibleError("a user has an all-zero channel")

    lambdas = (gamma * sigma2 / norms) if lambdas0 is None else np.asarray(lambdas0, dtype=float).copy()

    converged = False
    change = math.inf
    iterations = 0
    steps = 0
    while steps < max_iter:
        if steps and steps % MMSE_PLAIN_STEPS == 0:
            candidate, evaluations = _polish_dual(rows, lambdas, gamma, sigma2, tol)
            iterations += evaluations
            if candidate is not None:
                try:
                    with np.errstate(over="ignore", invalid="ignore"):
                        remaining = _residual(rows, candidate, gamma, sigma2)
                except InfeasibleError:
                    remaining = math.inf
                if remaining < tol:
                    lambdas = candidate
                    converged = True
                    break
                if remaining < change:
                    lambdas = candidate
        steps += 1
        iterations += 1
        updated = _dual_update(rows, lambdas, gamma, sigma2)
        change = float(np.max(np.abs(updated - lambdas) / np.maximum(np.abs(updated), 1e-300)))
        lambdas = updated
        if not np.all(np.isfinite(lambdas)):
            raise InfeasibleError("dual variables diverged")
        if change < tol:
            converged = True
            break

    if not converged:
        log_debug(f"MMSE fixed point not converged after {max_iter} substitution steps")
        raise NotConvergedError(f"fixed point not reached in {max_iter} iterations", lambdas)

    t = _duality_matrix(rows, lambdas, sigma2)
    directions = solve_linear(t, rows.T)
    directions = directions / np.linalg.norm(directions, axis=0, keepdims=True)
    # Rotate so that h_k^H w_k is real nonnegative
    own = np.sum(np.conj(rows.T) * directions, axis=0)
    directions = directions * np.exp(-1j * np.angle(own))[np.newaxis, :]

    gains = np.abs(np.conj(rows) @ directions) ** 2  # (i, j) = |h_i^H w_j|^2
    q = -gains
    q[np.diag_indices(k)] = np.diag(gains) / gamma
    try:
        p = np.real(solve_linear(q.astype(np.complex128), sigma2.astype(np.complex128)))
    except SingularMatrixError as e:
        raise InfeasibleError(f"power matrix Q singular: {e}") from e
    if np.any(p < 0):
        raise InfeasibleError(f"negative power allocation {p.tolist()}")

    w = directions * np.sqrt(p)[np.newaxis, :]
    return MmseResult(Precoder.from_matrix(w), lambdas, iterations)
