"""
Single-user discrete phase-shift optimization.

With MRT at the AP the transmit power is gamma * sigma^2 / ||h||^2, so the
phase search maximizes the channel power gain

    ||v^H Phi + h_d^H||^2 = v^H A v + 2 Re{v^H h_hat} + ||h_d||^2,

with Phi = diag(h_r^H) G, A = Phi Phi^H, h_hat = Phi h_d and
v^H = (e^{j theta_1}, ..., e^{j theta_N}). Provides the exact branch-and-bound
solver, successive refinement, a continuous-phase variant, nearest-level
quantization and the SOS1 integer-linear encoding of the same objective.
"""

from __future__ import annotations

import math
import time

import numpy as np

from src.config.defaults import REFINEMENT_THRESHOLD
from src.core.linalg import max_eigenvalue_psd
from src.core.precoding import ZeroChannelError, mrt
from src.schemas.channel import PhaseVector
from src.schemas.solver import GainOutcome, IlpModel, QuadraticForm, SolveOutcome
from src.utils.logger import log_debug, log_warning

MAX_SWEEPS = 100
DEFAULT_NODE_BUDGET = 2_000_000
# Refuse branch-and-bound when N * bits exceeds this unless forced
MAX_SEARCH_BITS = 30
# Relative tolerance for "strictly better" in per-element level choice
TIE_RTOL = 1e-12
# Distance from a midpoint, in level steps, treated as an exact tie in quantization
MIDWAY_TOL = 1e-9


class PhaseSearchError(Exception):
    """Base exception for phase-shift search failures."""


class BudgetExceededError(PhaseSearchError):
    """
    Raised when a search hits its node budget or refuses an oversized problem.

    ``incumbent`` holds the best solution found so far, or None when the
    search was refused before starting.
    """

    def __init__(self, message: str, incumbent: GainOutcome | SolveOutcome | None = None):
        super().__init__(message)
        self.incumbent = incumbent


def build_quadratic(g: np.ndarray, h_r: np.ndarray, h_d: np.ndarray) -> QuadraticForm:
    """
    Quadratic form of the channel power gain.

    Args:
        g: N x M AP-IRS channel
        h_r: IRS-user channel h_r (length N)
        h_d: AP-user channel h_d (length M)

    Returns:
        QuadraticForm with A = Phi Phi^H, h_hat = Phi h_d, constant = ||h_d||^2.
    """
    g = np.asarray(g, dtype=np.complex128)
    h_r = np.asarray(h_r, dtype=np.complex128).reshape(-1)
    h_d = np.asarray(h_d, dtype=np.complex128).reshape(-1)
    if g.shape != (h_r.shape[0], h_d.shape[0]):
        raise ValueError(f"g has shape {g.shape}, expected ({h_r.shape[0]}, {h_d.shape[0]})")

    phi = np.conj(h_r)[:, np.newaxis] * g
    a = phi @ np.conj(phi).T
    return QuadraticForm(
        a=a,
        h_hat=phi @ h_d,
        constant=float(np.real(np.vdot(h_d, h_d))),
        phi=phi,
    )


def objective_from_unit(q: QuadraticForm, u: np.ndarray) -> float:
    """Channel gain for reflection coefficients u_n = e^{j theta_n}."""
    value = np.real(u @ q.a @ np.conj(u)) + 2.0 * np.real(u @ q.h_hat) + q.constant
    return max(float(value), 0.0)


def objective(q: QuadraticForm, theta: PhaseVector) -> float:
    """Channel power gain ||h||^2 at discrete phase shifts theta."""
    if theta.n != q.n:
        raise ValueError(f"theta has {theta.n} elements, form has {q.n}")
    return objective_from_unit(q, theta.unit())


def upper_bound(q: QuadraticForm) -> float:
    """N * lambda_max(A) + 2 sum |h_hat(n)| + constant, which no phase vector exceeds."""
    return q.n * max_eigenvalue_psd(q.a) + 2.0 * float(np.sum(np.abs(q.h_hat))) + q.constant


def _level_phasors(bits: int) -> np.ndarray:
    n_levels = 2 ** bits
    return np.exp(2j * math.pi * np.arange(n_levels) / n_levels)


def _pick_level(scores: np.ndarray, current: int, scale: float) -> int:
    """
    Level with the highest score. The current level is kept unless another one
    is strictly better; among strictly better levels the lowest index wins.
    """
    tol = TIE_RTOL * max(scale, 1e-300)
    best = float(np.max(scores))
    if best <= scores[current] + tol:
        return current
    return int(np.flatnonzero(scores >= best - tol)[0])


def _zeta(q: QuadraticForm, a_conj_u: np.ndarray, u: np.ndarray, n: int) -> complex:
    """sum_{l != n} A(n,l) e^{-j theta_l} + h_hat(n) from the running A conj(u)."""
    return complex(a_conj_u[n] - q.a[n, n] * np.conj(u[n]) + q.h_hat[n])


def refine_element(q: QuadraticForm, theta: PhaseVector, n: int) -> PhaseVector:
    """
    Best level for element n with the others fixed: argmax_theta Re{e^{j theta} zeta_n}.

    The current level is kept on ties, so theta comes back unchanged when
    zeta_n == 0; among strictly better levels the lowest index wins.
    """
    if not 0 <= n < q.n:
        raise IndexError(f"element {n} outside 0..{q.n - 1}")
    u = theta.unit()
    zeta = _zeta(q, q.a @ np.conj(u), u, n)
    scores = np.real(_level_phasors(theta.bits) * zeta)
    level = _pick_level(scores, theta.levels[n], abs(zeta))
    return theta if level == theta.levels[n] else theta.with_level(n, level)


def _converged(previous: float, current: float, threshold: float) -> bool:
    if previous <= 0.0:
        return current <= previous
    return (current - previous) / previous < threshold


def successive_refinement(
    q: QuadraticForm,
    theta0: PhaseVector,
    threshold: float = REFINEMENT_THRESHOLD,
    max_sweeps: int = MAX_SWEEPS,
) -> GainOutcome:
    """
    Coordinate ascent over discrete phase levels, elements 1..N per sweep.

    Args:
        q: Quadratic form of the instance
        theta0: Starting phase vector
        threshold: Stop when a sweep raises the gain by less than this fraction
        max_sweeps: Sweep cap; the outcome is flagged not converged when hit

    Returns:
        GainOutcome with the gain after each level change in ``gain_trace``
        (index 0 is the starting gain).
    """
    if threshold <= 0:
        raise ValueError("threshold must be positive")
    if theta0.n != q.n:
        raise ValueError(f"theta0 has {theta0.n} elements, form has {q.n}")

    phasors = _level_phasors(theta0.bits)
    levels = theta0.as_array().copy()
    u = phasors[levels]
    a_conj_u = q.a @ np.conj(u)
    trace = [objective_from_unit(q, u)]

    converged = False
    sweeps = 0
    for sweeps in range(1, max_sweeps + 1):
        sweep_start = trace[-1]
        for n in range(q.n):
            zeta = _zeta(q, a_conj_u, u, n)
            scores = np.real(phasors * zeta)
            level = _pick_level(scores, int(levels[n]), abs(zeta))
            if level != levels[n]:
                new_u = phasors[level]
                a_conj_u += q.a[:, n] * (np.conj(new_u) - np.conj(u[n]))
                u[n] = new_u
                levels[n] = level
                trace.append(objective_from_unit(q, u))
        if _converged(sweep_start, trace[-1], threshold):
            converged = True
            break

    if not converged:
        log_warning(f"successive refinement stopped at the {max_sweeps}-sweep cap")

    theta = PhaseVector(bits=theta0.bits, levels=levels)
    return GainOutcome(
        theta=theta,
        phases=theta.radians(),
        gain=trace[-1],
        gain_trace=trace,
        iterations=sweeps,
        converged=converged,
    )


def continuous_refinement(
    q: QuadraticForm,
    theta0: np.ndarray | None = None,
    threshold: float = REFINEMENT_THRESHOLD,
    max_sweeps: int = MAX_SWEEPS,
) -> GainOutcome:
    """
    Coordinate ascent with unconstrained phases: theta_n <- -arg(zeta_n).

    Returns a GainOutcome whose ``theta`` is None and whose ``phases`` hold
    the continuous solution in [0, 2 pi).
    """
    if threshold <= 0:
        raise ValueError("threshold must be positive")
    phases = np.zeros(q.n) if theta0 is None else np.mod(np.asarray(theta0, dtype=float), 2.0 * math.pi)
    u = np.exp(1j * phases)
    a_conj_u = q.a @ np.conj(u)
    trace = [objective_from_unit(q, u)]

    converged = False
    sweeps = 0
    for sweeps in range(1, max_sweeps + 1):
        for n in range(q.n):
            zeta = _zeta(q, a_conj_u, u, n)
            if zeta == 0:
                continue
            new_u = np.exp(-1j * np.angle(zeta))
            a_conj_u += q.a[:, n] * (np.conj(new_u) - np.conj(u[n]))
            u[n] = new_u
        trace.append(objective_from_unit(q, u))
        if _converged(trace[-2], trace[-1], threshold):
            converged = True
            break

    return GainOutcome(
        theta=None,
        phases=np.mod(np.angle(u), 2.0 * math.pi),
        gain=trace[-1],
        gain_trace=trace,
        iterations=sweeps,
        converged=converged,
    )


def quantize_levels(theta_cont: np.ndarray, bits: int) -> np.ndarray:
    """Level indices nearest to each phase (any array shape); a tie goes to the lower index."""
    if bits < 1:
        raise ValueError("bits must be >= 1")
    n_levels = 2 ** bits
    step = 2.0 * math.pi / n_levels
    wrapped = np.mod(np.asarray(theta_cont, dtype=float), 2.0 * math.pi)
    scaled = wrapped / step
    nearest = np.ceil(scaled - 0.5 - MIDWAY_TOL)
    # midway between level L-1 and 2pi wraps to level 0
    nearest = np.where(np.abs(scaled - (n_levels - 0.5)) <= MIDWAY_TOL, 0.0, nearest)
    return np.mod(nearest, n_levels).astype(np.int64)


def quantize(theta_cont: np.ndarray, bits: int) -> PhaseVector:
    """
    Nearest discrete level per element in circular distance.

    A phase exactly midway between two levels goes to the lower level index,
    so 3pi/2 with one bit maps to level 0.
    """
    return PhaseVector(bits=bits, levels=quantize_levels(np.ravel(theta_cont), bits))


def solve_optimal(
    q: QuadraticForm,
    bits: int,
    node_budget: int = DEFAULT_NODE_BUDGET,
    force: bool = False,
    incumbent: GainOutcome | None = None,
) -> GainOutcome:
    """
    Global maximizer of the channel gain over all discrete phase vectors.

    Depth-first branch-and-bound over elements 1..N. A node with fixed prefix
    S is bounded by its exact prefix value, plus for every undecided element
    its best level against h_hat and the fixed prefix, plus 2|A(i,n)| for every
    pair of undecided elements. Children are visited in refine_element order
    and the incumbent starts from successive refinement.

    Args:
        q: Quadratic form of the instance
        bits: Phase resolution b
        node_budget: Maximum number of explored nodes
        force: Skip the N * bits size guard
        incumbent: Optional starting solution; defaults to successive
            refinement from all-zero phases

    Raises:
        BudgetExceededError: when the guard refuses the instance (incumbent None)
            or the budget runs out (incumbent = best solution so far).
    """
    n = q.n
    if n * bits > MAX_SEARCH_BITS and not force:
        log_warning(f"branch-and-bound refused: N*bits = {n * bits} > {MAX_SEARCH_BITS}")
        raise BudgetExceededError(f"N*bits = {n * bits} exceeds {MAX_SEARCH_BITS}; pass force=True")

    phasors = _level_phasors(bits)
    n_levels = phasors.shape[0]
    if incumbent is None:
        incumbent = successive_refinement(q, PhaseVector.zeros(n, bits))
    if incumbent.theta is None or incumbent.theta.bits != bits:
        raise ValueError(f"incumbent must be a {bits}-bit discrete solution")
    best_gain = incumbent.gain
    best_levels = incumbent.theta.as_array().copy()

    base = float(np.real(np.trace(q.a))) + q.constant
    abs_a = np.abs(q.a)
    # pair_tail[d] = sum over pairs d <= i < j of 2|A(i,j)|
    pair_tail = np.zeros(n + 1)
    for d in range(n - 1, -1, -1):
        pair_tail[d] = pair_tail[d + 1] + 2.0 * float(np.sum(abs_a[d, d + 1:]))
    scale = float(np.max(np.abs(q.a))) + float(np.max(np.abs(q.h_hat), initial=0.0)) + q.constant

    levels = np.zeros(n, dtype=np.int64)
    nodes = 0
    started = time.perf_counter()

    def descend(depth: int, coupling: np.ndarray, prefix_value: float) -> None:
        # coupling[m] = h_hat(m) + sum_{i < depth} A(m, i) e^{-j theta_i}
        nonlocal nodes, best_gain, best_levels
        nodes += 1
        if nodes > node_budget:
            raise BudgetExceededError("node budget exhausted")

        if depth == n:
            value = prefix_value + base
            if value > best_gain + TIE_RTOL * scale:
                best_gain = value
                best_levels = levels.copy()
            return

        rest = 2.0 * np.real(np.outer(coupling[depth:], phasors))
        bound = prefix_value + float(np.sum(np.max(rest, axis=1))) + pair_tail[depth] + base
        if bound <= best_gain + TIE_RTOL * scale:
            return

        scores = rest[0]
        order = sorted(range(n_levels), key=lambda lv: (-scores[lv], lv))
        for level in order:
            levels[depth] = level
            child = coupling + q.a[:, depth] * np.conj(phasors[level])
            descend(depth + 1, child, prefix_value + float(scores[level]))

    try:
        descend(0, q.h_hat.astype(np.complex128).copy(), 0.0)
    except BudgetExceededError as e:
        theta = PhaseVector(bits=bits, levels=best_levels)
        partial = GainOutcome(
            theta=theta,
            phases=theta.radians(),
            gain=objective(q, theta),
            converged=False,
            nodes_explored=nodes - 1,
        )
        raise BudgetExceededError(f"{e} after {node_budget} nodes", incumbent=partial) from None

    theta = PhaseVector(bits=bits, levels=best_levels)
    log_debug(f"branch-and-bound: {nodes} nodes in {(time.perf_counter() - started) * 1000:.1f} ms")
    return GainOutcome(
        theta=theta,
        phases=theta.radians(),
        gain=objective(q, theta),
        gain_trace=[incumbent.gain, objective(q, theta)],
        iterations=incumbent.iterations,
        nodes_explored=nodes,
    )


def enumerate_optimal(q: QuadraticForm, bits: int) -> GainOutcome:
    """Brute force over all L^N phase vectors; for small instances only."""
    n_levels = 2 ** bits
    if n_levels ** q.n > 2 ** 20:
        raise BudgetExceededError(f"{n_levels}^{q.n} assignments is too many to enumerate")
    grid = np.stack(np.meshgrid(*[np.arange(n_levels)] * q.n, indexing="ij"), axis=-1).reshape(-1, q.n)
    u = _level_phasors(bits)[grid]
    values = np.real(np.einsum("an,nm,am->a", u, q.a, np.conj(u))) + 2.0 * np.real(u @ q.h_hat) + q.constant
    best = int(np.argmax(values))
    theta = PhaseVector(bits=bits, levels=grid[best])
    return GainOutcome(theta=theta, phases=theta.radians(), gain=float(values[best]), nodes_explored=len(grid))


def mrt_outcome(
    g: np.ndarray,
    h_r: np.ndarray,
    h_d: np.ndarray,
    found: GainOutcome,
    gamma: float,
    sigma2: float,
) -> SolveOutcome:
    """
    AP transmit power and MRT precoder for a single-user phase solution.

    The power is gamma * sigma^2 / ||h||^2 on the combined channel at
    ``found.phases``; an all-zero combined channel gives +inf.
    """
    reflection = np.exp(1j * np.asarray(found.phases, dtype=float))
    h_herm = (np.conj(np.asarray(h_r).reshape(-1)) * reflection) @ g + np.conj(np.asarray(h_d).reshape(-1))
    trace = [gamma * sigma2 / v if v > 0 else math.inf for v in found.gain_trace]
    try:
        precoder = mrt(np.conj(h_herm), gamma, sigma2)
    except ZeroChannelError:
        return SolveOutcome(
            total_power=math.inf,
            theta=found.theta,
            phases=found.phases,
            iterations=found.iterations,
            objective_trace=trace,
            converged=found.converged,
            nodes_explored=found.nodes_explored,
        )
    return SolveOutcome(
        total_power=precoder.total_power,
        theta=found.theta,
        phases=found.phases,
        precoder=precoder,
        iterations=found.iterations,
        objective_trace=trace,
        converged=found.converged,
        nodes_explored=found.nodes_explored,
    )


# SOS1 integer-linear encoding


def build_ilp(q: QuadraticForm, bits: int) -> IlpModel:
    """
    Linear objective over SOS1 vectors x_n (element levels) and y_{i,n}
    (pairwise differences theta_i - theta_n wrapped into [0, 2 pi)).

    gain = sum_n x_coeffs[n] . x_n + sum_p y_coeffs[p] . y_p + constant,
    where constant = sum_n A(n,n) + ||h_d||^2.
    """
    n_levels = 2 ** bits
    levels = np.arange(n_levels) * 2.0 * math.pi / n_levels
    cosines = np.cos(levels)
    sines = np.sin(levels)
    # exact zeros at the representable axis points
    cosines[np.isclose(cosines, 0.0, atol=1e-15)] = 0.0
    sines[np.isclose(sines, 0.0, atol=1e-15)] = 0.0

    def row(z: complex) -> np.ndarray:
        arg = np.angle(z)
        return 2.0 * abs(z) * (math.cos(arg) * cosines - math.sin(arg) * sines)

    x_coeffs = np.stack([row(complex(h)) for h in q.h_hat]) if q.n else np.zeros((0, n_levels))
    pairs = tuple((i, k) for i in range(q.n) for k in range(i + 1, q.n))
    y_coeffs = np.stack([row(complex(q.a[i, k])) for i, k in pairs]) if pairs else np.zeros((0, n_levels))
    return IlpModel(
        bits=bits,
        levels=levels,
        cosines=cosines,
        sines=sines,
        x_coeffs=x_coeffs,
        pairs=pairs,
        y_coeffs=y_coeffs,
        constant=float(np.real(np.trace(q.a))) + q.constant,
    )


def encode_assignment(model: IlpModel, theta: PhaseVector) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    Binary variables for a phase vector.

    Returns:
        (x, y, eps): x is N x L one-hot, y is P x L one-hot with
        y_p selecting (l_i - l_n) mod L, eps_p = 1 when theta_i < theta_n.
    """
    n_levels = model.n_levels
    lv = theta.as_array()
    x = np.zeros((theta.n, n_levels), dtype=np.int64)
    x[np.arange(theta.n), lv] = 1
    y = np.zeros((len(model.pairs), n_levels), dtype=np.int64)
    eps = np.zeros(len(model.pairs), dtype=np.int64)
    for p, (i, k) in enumerate(model.pairs):
        y[p, (lv[i] - lv[k]) % n_levels] = 1
        eps[p] = 1 if lv[i] < lv[k] else 0
    return x, y, eps


def coupling_satisfied(model: IlpModel, x: np.ndarray, y: np.ndarray, eps: np.ndarray) -> bool:
    """SOS1 sums and a^T(x_i - x_n) + 2 pi eps_{i,n} == a^T y_{i,n} for every pair."""
    if np.any(x.sum(axis=1) != 1) or (len(y) and np.any(y.sum(axis=1) != 1)):
        return False
    a = model.levels
    for p, (i, k) in enumerate(model.pairs):
        lhs = a @ (x[i] - x[k]) + 2.0 * math.pi * eps[p]
        if not math.isclose(lhs, float(a @ y[p]), abs_tol=1e-9):
            return False
    return True


def ilp_objective(model: IlpModel, x: np.ndarray, y: np.ndarray) -> float:
    """Linear part of the encoded objective (without the constant)."""
    return float(np.sum(model.x_coeffs * x) + np.sum(model.y_coeffs * y))


def decode_levels(model: IlpModel, x: np.ndarray) -> PhaseVector:
    """Phase vector selected by the SOS1 element vectors."""
    return PhaseVector(bits=model.bits, levels=np.argmax(x, axis=1))
