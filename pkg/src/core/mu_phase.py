"""
Multiuser joint precoding and discrete phase-shift optimization.

The outer problem searches discrete phase vectors; the inner problem is the
precoder power for fixed phases, either zero-forcing (closed form) or the
SINR-constrained MMSE optimum. Infeasible or rank-deficient inner problems
have power +inf, which orders above every finite value.
"""

from __future__ import annotations

import itertools
import math

import numpy as np
import scipy.linalg
from scipy.optimize import minimize_scalar

from src.config.defaults import REFINEMENT_THRESHOLD
from src.config.enums import PrecoderKind
from src.core.channel import combined_channels
from src.core.linalg import RankDeficientError
from src.core.precoding import (
    InfeasibleError,
    NotConvergedError,
    mmse,
    zf,
    zf_total_power,
)
from src.core.su_phase import MAX_SWEEPS, BudgetExceededError, PhaseSearchError
from src.schemas.channel import PhaseVector
from src.schemas.solver import MultiuserInstance, Precoder, SinrSpec, SolveOutcome
from src.utils.logger import log_debug, log_warning

# Refuse exhaustive search beyond this many phase vectors unless forced
MAX_EXHAUSTIVE_CANDIDATES = 2 ** 20
POWER_RTOL = 1e-12
# Coarse grid of the continuous per-element search before bounded refinement
CONTINUOUS_GRID = 16
# Codebook orders already reported as falling back to random codewords
_fallback_orders: set[int] = set()


class AllInfeasibleError(PhaseSearchError):
    """Raised when every evaluated phase vector gives infinite power."""


class UnsupportedOrderError(PhaseSearchError):
    """Raised when no Hadamard construction exists for the requested order."""


def inner_power(
    h: np.ndarray,
    spec: SinrSpec,
    kind: PrecoderKind,
    warm: np.ndarray | None = None,
) -> tuple[float, np.ndarray | None]:
    """
    Inner precoder power for fixed combined channels.

    Args:
        h: K x M combined channels
        spec: SINR targets and noise powers
        kind: ZF or MMSE precoder
        warm: MMSE dual variables to start the fixed point from

    Returns:
        (power, lambdas): power is +inf when infeasible; lambdas are the MMSE
        dual variables (None for ZF or on failure).
    """
    k, m = h.shape
    match kind:
        case PrecoderKind.ZF:
            if m < k:
                return math.inf, None
            try:
                return zf_total_power(h, spec), None
            except RankDeficientError:
                return math.inf, None
        case PrecoderKind.MMSE:
            try:
                result = mmse(h, spec, lambdas0=warm)
            except NotConvergedError:
                if warm is not None:
                    return inner_power(h, spec, kind)
                if m >= k and math.isfinite(inner_power(h, spec, PrecoderKind.ZF)[0]):
                    log_warning("MMSE fixed point not converged on a ZF-feasible channel; power set to +inf")
                return math.inf, None
            except InfeasibleError:
                return math.inf, None
            return result.precoder.total_power, result.lambdas
        case _:
            raise ValueError(f"Unsupported precoder kind: {kind}")


def inner_precoder(
    h: np.ndarray,
    spec: SinrSpec,
    kind: PrecoderKind,
    warm: np.ndarray | None = None,
) -> Precoder | None:
    """Precoder achieving inner_power, or None when infeasible."""
    try:
        match kind:
            case PrecoderKind.ZF:
                return zf(h, spec) if h.shape[1] >= h.shape[0] else None
            case PrecoderKind.MMSE:
                return mmse(h, spec, lambdas0=warm).precoder
            case _:
                raise ValueError(f"Unsupported precoder kind: {kind}")
    except (RankDeficientError, InfeasibleError):
        return None
    except NotConvergedError:
        return mmse(h, spec).precoder if warm is not None else None


def _outcome(
    instance: MultiuserInstance,
    theta: PhaseVector | None,
    phases: np.ndarray,
    kind: PrecoderKind,
    power: float,
    warm: np.ndarray | None = None,
    iterations: int = 0,
    trace: list[float] | None = None,
    converged: bool = True,
) -> SolveOutcome:
    precoder = None
    if math.isfinite(power):
        h = combined_channels(instance.channels, np.exp(1j * phases))
        precoder = inner_precoder(h, instance.spec, kind, warm)
        power = precoder.total_power if precoder is not None else math.inf
    return SolveOutcome(
        total_power=power,
        theta=theta,
        phases=phases,
        precoder=precoder,
        iterations=iterations,
        objective_trace=trace or [],
        converged=converged,
    )


def zf_power(instance: MultiuserInstance, theta: PhaseVector) -> float:
    """tr(P (H^H H)^{-1}) at phases theta; +inf when M < K or H is rank deficient."""
    h = combined_channels(instance.channels, theta.unit())
    return inner_power(h, instance.spec, PrecoderKind.ZF)[0]


def _better(candidate: float, incumbent: float) -> bool:
    if math.isinf(candidate):
        return False
    if math.isinf(incumbent):
        return True
    return candidate < incumbent - POWER_RTOL * incumbent


def _sweep_converged(previous: float, current: float, threshold: float) -> bool:
    if math.isinf(current):
        return False
    if math.isinf(previous):
        return False
    if previous <= 0.0:
        return True
    return (previous - current) / previous < threshold


def _refine(
    instance: MultiuserInstance,
    theta0: PhaseVector,
    threshold: float,
    kind: PrecoderKind,
    warm_start: bool,
) -> SolveOutcome:
    """Discrete per-element one-dimensional search minimizing the inner power."""
    if threshold <= 0:
        raise ValueError("threshold must be positive")
    ch = instance.channels
    if theta0.n != ch.n_elements:
        raise ValueError(f"theta0 has {theta0.n} elements, channel has {ch.n_elements}")
    theta0 = theta0.at_bits(instance.bits)

    n_levels = instance.n_levels
    phasors = np.exp(2j * math.pi * np.arange(n_levels) / n_levels)
    levels = theta0.as_array().copy()
    u = phasors[levels]
    h_herm = (np.conj(ch.h_r) * u[np.newaxis, :]) @ ch.g + np.conj(ch.h_d)
    # cascade[n] = conj(h_r[:, n]) outer g[n], the K x M contribution of element n
    cascade = np.conj(ch.h_r).T[:, :, np.newaxis] * ch.g[:, np.newaxis, :]

    power, lambdas = inner_power(np.conj(h_herm), instance.spec, kind)
    trace = [power]
    any_finite = math.isfinite(power)
    converged = False
    sweeps = 0

    for sweeps in range(1, MAX_SWEEPS + 1):
        sweep_start = power
        for n in range(ch.n_elements):
            current = int(levels[n])
            best_level, best_power, best_lambdas = current, power, lambdas
            for level in range(n_levels):
                if level == current:
                    continue
                candidate = h_herm + cascade[n] * (phasors[level] - u[n])
                warm = lambdas if warm_start else None
                value, cand_lambdas = inner_power(np.conj(candidate), instance.spec, kind, warm)
                any_finite = any_finite or math.isfinite(value)
                if _better(value, best_power):
                    best_level, best_power, best_lambdas = level, value, cand_lambdas
            if best_level != current:
                h_herm = h_herm + cascade[n] * (phasors[best_level] - u[n])
                u[n] = phasors[best_level]
                levels[n] = best_level
                power, lambdas = best_power, best_lambdas
                trace.append(power)
        if sweeps == 1 and not any_finite:
            raise AllInfeasibleError("every candidate of the first sweep has infinite power")
        if _sweep_converged(sweep_start, power, threshold):
            converged = True
            break

    if not converged:
        log_warning(f"{kind.value} refinement stopped at the {MAX_SWEEPS}-sweep cap")

    theta = PhaseVector(bits=instance.bits, levels=levels)
    return _outcome(
        instance,
        theta,
        theta.radians(),
        kind,
        power,
        warm=lambdas,
        iterations=sweeps,
        trace=trace,
        converged=converged,
    )


def zf_refinement(
    instance: MultiuserInstance,
    theta0: PhaseVector | None = None,
    threshold: float = REFINEMENT_THRESHOLD,
) -> SolveOutcome:
    """
    ZF-based successive refinement: for each element in turn, the level
    minimizing tr(P (H^H H)^{-1}) with the others fixed.

    Raises:
        AllInfeasibleError: if no candidate in the first sweep is finite.
    """
    if theta0 is None:
        theta0 = PhaseVector.zeros(instance.channels.n_elements, instance.bits)
    return _refine(instance, theta0, threshold, PrecoderKind.ZF, warm_start=False)


def mmse_refinement(
    instance: MultiuserInstance,
    theta0: PhaseVector | None = None,
    threshold: float = REFINEMENT_THRESHOLD,
) -> SolveOutcome:
    """
    MMSE-based successive refinement; candidates warm-start the fixed point
    from the current dual variables.

    Raises:
        AllInfeasibleError: if no candidate in the first sweep is finite.
    """
    if theta0 is None:
        theta0 = PhaseVector.zeros(instance.channels.n_elements, instance.bits)
    return _refine(instance, theta0, threshold, PrecoderKind.MMSE, warm_start=True)


def continuous_zf_refinement(
    instance: MultiuserInstance,
    theta0: np.ndarray | None = None,
    threshold: float = REFINEMENT_THRESHOLD,
) -> SolveOutcome:
    """
    ZF refinement with continuous phases.

    Each element update scans a coarse grid over [0, 2 pi), then refines the
    best grid point with a bounded scalar search; a move is kept only if it
    lowers the power.

    Returns:
        SolveOutcome with ``theta`` None and continuous ``phases``.
    """
    if threshold <= 0:
        raise ValueError("threshold must be positive")
    ch = instance.channels
    spec = instance.spec
    phases = np.zeros(ch.n_elements) if theta0 is None else np.mod(np.asarray(theta0, dtype=float), 2.0 * math.pi)
    u = np.exp(1j * phases)
    h_herm = (np.conj(ch.h_r) * u[np.newaxis, :]) @ ch.g + np.conj(ch.h_d)
    cascade = np.conj(ch.h_r).T[:, :, np.newaxis] * ch.g[:, np.newaxis, :]
    grid = np.arange(CONTINUOUS_GRID) * 2.0 * math.pi / CONTINUOUS_GRID
    half_step = math.pi / CONTINUOUS_GRID

    power = inner_power(np.conj(h_herm), spec, PrecoderKind.ZF)[0]
    trace = [power]
    any_finite = math.isfinite(power)
    converged = False
    sweeps = 0

    for sweeps in range(1, MAX_SWEEPS + 1):
        for n in range(ch.n_elements):
            base = h_herm - cascade[n] * u[n]

            def power_at(angle: float, base: np.ndarray = base, n: int = n) -> float:
                value = inner_power(np.conj(base + cascade[n] * np.exp(1j * angle)), spec, PrecoderKind.ZF)[0]
                return value if math.isfinite(value) else 1e300

            values = np.array([power_at(a) for a in grid])
            start = float(grid[int(np.argmin(values))])
            if values.min() >= 1e300:
                continue
            any_finite = True
            found = minimize_scalar(
                power_at,
                bounds=(start - 2.0 * half_step, start + 2.0 * half_step),
                method="bounded",
                options={"xatol": 1e-8},
            )
            angle, value = (float(found.x), float(found.fun)) if found.fun < values.min() else (start, float(values.min()))
            if _better(value, power):
                u[n] = np.exp(1j * angle)
                h_herm = base + cascade[n] * u[n]
                power = value
        if sweeps == 1 and not any_finite:
            raise AllInfeasibleError("continuous refinement found no finite power")
        trace.append(power)
        if _sweep_converged(trace[-2], trace[-1], threshold):
            converged = True
            break

    return _outcome(
        instance,
        None,
        np.mod(np.angle(u), 2.0 * math.pi),
        PrecoderKind.ZF,
        power,
        iterations=sweeps,
        trace=trace,
        converged=converged,
    )


def exhaustive_optimal(
    instance: MultiuserInstance,
    precoder_kind: PrecoderKind = PrecoderKind.MMSE,
    force: bool = False,
) -> SolveOutcome:
    """
    Minimum inner power over all L^N phase vectors.

    Ties keep the lexicographically first phase vector. Returns a +inf outcome
    when every phase vector is infeasible.

    Raises:
        BudgetExceededError: if L^N exceeds 2^20 and ``force`` is False.
    """
    n = instance.channels.n_elements
    n_levels = instance.n_levels
    if n_levels ** n > MAX_EXHAUSTIVE_CANDIDATES and not force:
        log_warning(f"exhaustive search refused: {n_levels}^{n} phase vectors")
        raise BudgetExceededError(f"{n_levels}^{n} phase vectors exceeds {MAX_EXHAUSTIVE_CANDIDATES}")

    best_power, best_levels, best_lambdas = math.inf, (0,) * n, None
    warm = None
    for levels in itertools.product(range(n_levels), repeat=n):
        theta = PhaseVector(bits=instance.bits, levels=levels)
        h = combined_channels(instance.channels, theta.unit())
        value, lambdas = inner_power(h, instance.spec, precoder_kind, warm)
        if lambdas is not None:
            warm = lambdas
        if _better(value, best_power):
            best_power, best_levels, best_lambdas = value, levels, lambdas

    theta = PhaseVector(bits=instance.bits, levels=best_levels)
    log_debug(f"exhaustive search over {n_levels ** n} vectors: best {best_power:.4e} W")
    result = _outcome(instance, theta, theta.radians(), precoder_kind, best_power, warm=best_lambdas)
    return result.model_copy(update={"nodes_explored": n_levels ** n})


def hadamard_codebook(n: int) -> list[PhaseVector]:
    """
    Columns of the order-n Sylvester Hadamard matrix as 1-bit phase vectors
    (+1 -> 0, -1 -> pi).

    Raises:
        UnsupportedOrderError: if n is not a power of two.
    """
    if n < 1 or n & (n - 1):
        raise UnsupportedOrderError(f"no Hadamard construction of order {n}")
    matrix = scipy.linalg.hadamard(n)
    return [PhaseVector(bits=1, levels=(matrix[:, j] < 0).astype(np.int64)) for j in range(n)]


def random_codebook(n: int, seed: int, size: int | None = None) -> list[PhaseVector]:
    """``size`` (default n) seeded random +-1 codewords as 1-bit phase vectors."""
    rng = np.random.default_rng(seed)
    draws = rng.integers(0, 2, size=(size or n, n))
    return [PhaseVector(bits=1, levels=row) for row in draws]


def codebook_for(n: int, seed: int) -> list[PhaseVector]:
    """Hadamard codebook when available, else the random +-1 fallback with a notice."""
    try:
        return hadamard_codebook(n)
    except UnsupportedOrderError:
        if n not in _fallback_orders:
            _fallback_orders.add(n)
            log_warning(f"no Hadamard codebook of order {n}; using a seeded random +-1 codebook")
        return random_codebook(n, seed)


def codebook_select(
    instance: MultiuserInstance,
    codebook: list[PhaseVector],
    precoder_kind: PrecoderKind = PrecoderKind.MMSE,
) -> SolveOutcome:
    """
    Codeword with the lowest inner power; ties keep the earliest codeword.

    Raises:
        AllInfeasibleError: if every codeword gives infinite power.
    """
    if not codebook:
        raise ValueError("codebook is empty")
    best_power, best, best_lambdas = math.inf, None, None
    for codeword in codebook:
        h = combined_channels(instance.channels, codeword.unit())
        value, lambdas = inner_power(h, instance.spec, precoder_kind)
        if _better(value, best_power):
            best_power, best, best_lambdas = value, codeword, lambdas
    if best is None:
        raise AllInfeasibleError(f"all {len(codebook)} codewords are infeasible")
    return _outcome(instance, best, best.radians(), precoder_kind, best_power, warm=best_lambdas)


def evaluate_phases(
    instance: MultiuserInstance,
    theta: PhaseVector,
    precoder_kind: PrecoderKind = PrecoderKind.MMSE,
) -> SolveOutcome:
    """Inner power and precoder at fixed phases; +inf outcome when infeasible."""
    h = combined_channels(instance.channels, theta.unit())
    power, lambdas = inner_power(h, instance.spec, precoder_kind)
    return _outcome(instance, theta, theta.radians(), precoder_kind, power, warm=lambdas)
