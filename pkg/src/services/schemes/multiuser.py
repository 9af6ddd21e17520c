"""
Multiuser schemes.

Refinement schemes start from the best codeword under their own inner
precoder, falling back to all-zero phases when every codeword is infeasible.
Quantization, codebook and no-IRS powers are evaluated with the MMSE precoder.
"""

from __future__ import annotations

import math

import numpy as np

from src.config.enums import PrecoderKind
from src.core.mu_phase import (
    AllInfeasibleError,
    codebook_for,
    codebook_select,
    continuous_zf_refinement,
    evaluate_phases,
    exhaustive_optimal,
    inner_power,
    inner_precoder,
    mmse_refinement,
    zf_refinement,
)
from src.core.precoding import ZeroChannelError, mrt
from src.core.su_phase import quantize
from src.schemas.channel import PhaseVector
from src.schemas.solver import MultiuserInstance, SolveOutcome
from src.services.base import TrialContext
from src.utils.logger import log_debug


def start_point(instance: MultiuserInstance, kind: PrecoderKind, seed: int) -> PhaseVector:
    """Best codeword for the given inner precoder, or all-zero phases."""
    n = instance.channels.n_elements
    try:
        theta = codebook_select(instance, codebook_for(n, seed), kind).theta
    except AllInfeasibleError:
        log_debug("no feasible codeword; refinement starts from zero phases")
        return PhaseVector.zeros(n, instance.bits)
    return theta.at_bits(instance.bits)


class OptimalScheme:
    """Exhaustive search with the MMSE inner precoder."""
    name = "optimal"

    def solve(self, ctx: TrialContext) -> SolveOutcome:
        return exhaustive_optimal(ctx.instance(), PrecoderKind.MMSE)


class ZfRefineScheme:
    """ZF-based successive refinement."""
    name = "refine"

    def solve(self, ctx: TrialContext) -> SolveOutcome:
        instance = ctx.instance()
        return zf_refinement(instance, start_point(instance, PrecoderKind.ZF, ctx.seed), ctx.threshold)


class MmseRefineScheme:
    """MMSE-based successive refinement."""
    name = "mmse_refine"

    def solve(self, ctx: TrialContext) -> SolveOutcome:
        instance = ctx.instance()
        return mmse_refinement(instance, start_point(instance, PrecoderKind.MMSE, ctx.seed), ctx.threshold)


class ContinuousBaselineScheme:
    """Continuous-phase ZF refinement."""
    name = "continuous_baseline"

    def solve(self, ctx: TrialContext) -> SolveOutcome:
        return continuous_zf_refinement(ctx.instance(), threshold=ctx.threshold)


class QuantizeScheme:
    """Continuous ZF refinement quantized, then evaluated with MMSE."""
    name = "quantize"

    def solve(self, ctx: TrialContext) -> SolveOutcome:
        instance = ctx.instance()
        continuous = continuous_zf_refinement(instance, threshold=ctx.threshold)
        outcome = evaluate_phases(instance, quantize(continuous.phases, ctx.bits), PrecoderKind.MMSE)
        return outcome.model_copy(update={"iterations": continuous.iterations})


class CodebookScheme:
    """Best Hadamard (or random +-1) codeword under MMSE."""
    name = "codebook"

    def solve(self, ctx: TrialContext) -> SolveOutcome:
        instance = ctx.instance()
        return codebook_select(instance, codebook_for(instance.channels.n_elements, ctx.seed), PrecoderKind.MMSE)


class NoIrsScheme:
    """
    AP power without the IRS: MRT on h_d for one user, MMSE on H_d otherwise.
    """
    name = "no_irs"

    def solve(self, ctx: TrialContext) -> SolveOutcome:
        h_d = ctx.channels.h_d
        phases = np.zeros(0)
        if h_d.shape[0] == 1:
            try:
                precoder = mrt(h_d[0], ctx.spec.targets[0], ctx.spec.noise_powers[0])
            except ZeroChannelError:
                return SolveOutcome(total_power=math.inf, theta=None, phases=phases)
            return SolveOutcome(total_power=precoder.total_power, theta=None, phases=phases, precoder=precoder)

        power, lambdas = inner_power(h_d, ctx.spec, PrecoderKind.MMSE)
        precoder = inner_precoder(h_d, ctx.spec, PrecoderKind.MMSE, lambdas) if math.isfinite(power) else None
        if precoder is None:
            return SolveOutcome(total_power=math.inf, theta=None, phases=phases)
        return SolveOutcome(total_power=precoder.total_power, theta=None, phases=phases, precoder=precoder)
