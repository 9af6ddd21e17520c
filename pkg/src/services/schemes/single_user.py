"""
Single-user schemes.

All single-user schemes maximize the channel power gain and map the result to
AP power through MRT. The Hadamard codebook doubles as the starting point of
successive refinement.
"""

from __future__ import annotations

import numpy as np

from src.core.mu_phase import codebook_for
from src.core.su_phase import (
    build_quadratic,
    continuous_refinement,
    mrt_outcome,
    objective,
    quantize,
    solve_optimal,
    successive_refinement,
)
from src.schemas.channel import PhaseVector
from src.schemas.solver import GainOutcome, QuadraticForm, SolveOutcome
from src.services.base import TrialContext


def _quadratic(ctx: TrialContext) -> QuadraticForm:
    ch = ctx.channels
    return build_quadratic(ch.g, ch.h_r[0], ch.h_d[0])


def _as_gain(q: QuadraticForm, theta: PhaseVector) -> GainOutcome:
    gain = objective(q, theta)
    return GainOutcome(theta=theta, phases=theta.radians(), gain=gain, gain_trace=[gain])


def _to_power(ctx: TrialContext, found: GainOutcome) -> SolveOutcome:
    ch = ctx.channels
    return mrt_outcome(
        ch.g, ch.h_r[0], ch.h_d[0], found,
        gamma=ctx.spec.targets[0],
        sigma2=ctx.spec.noise_powers[0],
    )


def best_codeword(q: QuadraticForm, ctx: TrialContext) -> PhaseVector:
    """Codeword with the largest gain (earliest on ties), at the context resolution."""
    codebook = codebook_for(q.n, ctx.seed)
    gains = [objective(q, c) for c in codebook]
    return codebook[int(np.argmax(gains))].at_bits(ctx.bits)


class OptimalScheme:
    """Branch-and-bound global optimum."""
    name = "optimal"

    def solve(self, ctx: TrialContext) -> SolveOutcome:
        q = _quadratic(ctx)
        incumbent = successive_refinement(q, best_codeword(q, ctx), threshold=ctx.threshold)
        return _to_power(ctx, solve_optimal(q, ctx.bits, node_budget=ctx.node_budget, incumbent=incumbent))


class RefineScheme:
    """Successive refinement started from the best codeword."""
    name = "refine"

    def solve(self, ctx: TrialContext) -> SolveOutcome:
        q = _quadratic(ctx)
        return _to_power(ctx, successive_refinement(q, best_codeword(q, ctx), threshold=ctx.threshold))


class ContinuousBaselineScheme:
    """Continuous-phase refinement, the unquantized reference."""
    name = "continuous_baseline"

    def solve(self, ctx: TrialContext) -> SolveOutcome:
        return _to_power(ctx, continuous_refinement(_quadratic(ctx), threshold=ctx.threshold))


class QuantizeScheme:
    """Continuous refinement quantized to the nearest levels."""
    name = "quantize"

    def solve(self, ctx: TrialContext) -> SolveOutcome:
        q = _quadratic(ctx)
        continuous = continuous_refinement(q, threshold=ctx.threshold)
        found = _as_gain(q, quantize(continuous.phases, ctx.bits))
        found = found.model_copy(update={"iterations": continuous.iterations})
        return _to_power(ctx, found)


class CodebookScheme:
    """Best Hadamard (or random +-1) codeword."""
    name = "codebook"

    def solve(self, ctx: TrialContext) -> SolveOutcome:
        q = _quadratic(ctx)
        return _to_power(ctx, _as_gain(q, best_codeword(q, ctx)))
