"""Tests for the multiuser phase-shift solvers and codebooks."""

import math

import numpy as np
import pytest

from src.config.enums import PrecoderKind
from src.core.channel import combined_channels
from src.core.mu_phase import (
    AllInfeasibleError,
    UnsupportedOrderError,
    codebook_select,
    continuous_zf_refinement,
    evaluate_phases,
    exhaustive_optimal,
    hadamard_codebook,
    inner_power,
    mmse_refinement,
    random_codebook,
    zf_power,
    zf_refinement,
)
from src.core.precoding import sinr, zf
from src.core.su_phase import (
    BudgetExceededError,
    build_quadratic,
    enumerate_optimal,
    successive_refinement,
)
from src.schemas.channel import ChannelRealization, PhaseVector
from src.schemas.solver import MultiuserInstance, SinrSpec
from tests.conftest import crandn


def meets_targets(instance: MultiuserInstance, outcome) -> bool:
    h = combined_channels(instance.channels, np.exp(1j * outcome.phases))
    achieved = sinr(h, outcome.precoder, instance.spec)
    return bool(np.all(achieved >= instance.spec.gamma() * (1.0 - 1e-6)))


# zf_power


def test_zf_power_single_user_is_mrt_power(make_instance, rng):
    instance = make_instance(1, m=4, n=6, k=1, gamma=10.0, sigma2=0.01)
    theta = PhaseVector(bits=1, levels=rng.integers(0, 2, size=6))
    h = combined_channels(instance.channels, theta.unit())[0]
    assert zf_power(instance, theta) == pytest.approx(10.0 * 0.01 / np.linalg.norm(h) ** 2, rel=1e-10)


def test_zf_power_identical_users_is_infinite(rng):
    g = crandn(rng, 4, 3)
    h_r, h_d = crandn(rng, 1, 4), crandn(rng, 1, 3)
    channels = ChannelRealization(g=g, h_d=np.vstack([h_d, h_d]), h_r=np.vstack([h_r, h_r]))
    instance = MultiuserInstance(channels=channels, spec=SinrSpec.uniform(2, 1.0, 1.0), bits=1)
    assert math.isinf(zf_power(instance, PhaseVector.zeros(4, 1)))


def test_zf_power_fewer_antennas_than_users(make_instance):
    instance = make_instance(2, m=1, n=4, k=2)
    assert math.isinf(zf_power(instance, PhaseVector.zeros(4, 1)))


def test_zf_power_matches_precoder(make_instance, rng):
    instance = make_instance(3, m=4, n=8, k=3, bits=2)
    theta = PhaseVector(bits=2, levels=rng.integers(0, 4, size=8))
    h = combined_channels(instance.channels, theta.unit())
    assert zf_power(instance, theta) == pytest.approx(zf(h, instance.spec).total_power, rel=1e-9)


def test_mmse_power_never_exceeds_zf(make_instance, rng):
    instance = make_instance(4, m=4, n=6, k=3)
    for _ in range(20):
        h = combined_channels(instance.channels, np.exp(1j * math.pi * rng.integers(0, 2, size=6)))
        zf_value = inner_power(h, instance.spec, PrecoderKind.ZF)[0]
        mmse_value = inner_power(h, instance.spec, PrecoderKind.MMSE)[0]
        assert mmse_value <= zf_value * (1.0 + 1e-9)


@pytest.mark.parametrize("gamma_db", [15.0, 30.0])
def test_mmse_power_finite_on_preset_channels(preset_context, rng, gamma_db):
    ctx = preset_context("fig6a", gamma_db)
    n = ctx.channels.n_elements
    for _ in range(5):
        h = combined_channels(ctx.channels, np.exp(1j * math.pi * rng.integers(0, 2, size=n)))
        zf_value = inner_power(h, ctx.spec, PrecoderKind.ZF)[0]
        mmse_value, lambdas = inner_power(h, ctx.spec, PrecoderKind.MMSE)
        assert math.isfinite(mmse_value)
        assert lambdas is not None
        assert mmse_value <= zf_value * (1.0 + 1e-9)


# refinements


def test_zf_refinement_single_user_matches_gain_refinement(make_instance):
    for seed in range(5):
        instance = make_instance(10 + seed, m=4, n=8, k=1, bits=2, gamma=5.0, sigma2=0.1)
        ch = instance.channels
        q = build_quadratic(ch.g, ch.h_r[0], ch.h_d[0])
        gain = successive_refinement(q, PhaseVector.zeros(8, 2), threshold=1e-12)
        outcome = zf_refinement(instance, PhaseVector.zeros(8, 2), threshold=1e-12)
        assert outcome.theta == gain.theta
        assert outcome.total_power == pytest.approx(5.0 * 0.1 / gain.gain, rel=1e-9)


def test_mmse_refinement_single_user_matches_zf(make_instance):
    instance = make_instance(20, m=3, n=6, k=1)
    by_zf = zf_refinement(instance, PhaseVector.zeros(6, 1))
    by_mmse = mmse_refinement(instance, PhaseVector.zeros(6, 1))
    assert by_mmse.theta == by_zf.theta
    assert by_mmse.total_power == pytest.approx(by_zf.total_power, rel=1e-8)


@pytest.mark.parametrize("refine", [zf_refinement, mmse_refinement])
def test_refinement_trace_is_non_increasing(make_instance, refine):
    instance = make_instance(30, m=4, n=8, k=2)
    outcome = refine(instance, PhaseVector.zeros(8, 1))
    trace = outcome.objective_trace
    assert trace[0] >= trace[-1]
    # one entry per accepted level change, each a strict decrease
    assert all(b < a for a, b in zip(trace, trace[1:]) if math.isfinite(a))
    assert len(trace) - 1 >= sum(level != 0 for level in outcome.theta.levels)
    assert trace[-1] == pytest.approx(outcome.total_power, rel=1e-8)
    assert outcome.iterations >= 1
    assert meets_targets(instance, outcome)


def test_refinement_fixed_point_at_exhaustive_zf_optimum(make_instance):
    instance = make_instance(31, m=3, n=2, k=2, bits=2)
    best = exhaustive_optimal(instance, PrecoderKind.ZF)
    outcome = zf_refinement(instance, best.theta)
    assert outcome.theta == best.theta
    assert outcome.total_power == pytest.approx(best.total_power, rel=1e-9)


def test_refinement_rejects_mismatched_start(make_instance):
    instance = make_instance(32, m=3, n=4, k=2)
    with pytest.raises(ValueError):
        zf_refinement(instance, PhaseVector.zeros(5, 1))


def test_all_infeasible_refinement_raises(make_instance):
    instance = make_instance(33, m=1, n=4, k=2)
    with pytest.raises(AllInfeasibleError):
        zf_refinement(instance)


def test_continuous_refinement_is_monotone(make_instance):
    instance = make_instance(34, m=4, n=8, k=2)
    outcome = continuous_zf_refinement(instance)
    trace = outcome.objective_trace
    assert all(b <= a for a, b in zip(trace, trace[1:]))
    assert outcome.theta is None
    assert outcome.total_power <= zf_power(instance, PhaseVector.zeros(8, 1)) * (1.0 + 1e-9)
    assert np.all((outcome.phases >= 0.0) & (outcome.phases < 2.0 * math.pi))


# exhaustive search and dominance


def test_exhaustive_single_user_matches_gain_optimum(make_instance):
    instance = make_instance(40, m=3, n=5, k=1, bits=2, gamma=2.0, sigma2=0.5)
    ch = instance.channels
    best_gain = enumerate_optimal(build_quadratic(ch.g, ch.h_r[0], ch.h_d[0]), 2).gain
    outcome = exhaustive_optimal(instance)
    assert outcome.total_power == pytest.approx(2.0 * 0.5 / best_gain, rel=1e-8)
    assert outcome.nodes_explored == 4 ** 5


def test_exhaustive_guard(make_instance):
    instance = make_instance(41, m=4, n=21, k=2)
    with pytest.raises(BudgetExceededError) as info:
        exhaustive_optimal(instance)
    assert info.value.incumbent is None


def test_exhaustive_dominates_every_heuristic(make_instance):
    for seed in range(30):
        instance = make_instance(100 + seed, m=4, n=4, k=2)
        optimum = exhaustive_optimal(instance)
        assert optimum.feasible
        assert meets_targets(instance, optimum)
        candidates = [
            zf_refinement(instance),
            mmse_refinement(instance),
            codebook_select(instance, hadamard_codebook(4)),
            evaluate_phases(instance, PhaseVector.zeros(4, 1)),
        ]
        for outcome in candidates:
            assert optimum.total_power <= outcome.total_power * (1.0 + 1e-9)
            if outcome.feasible:
                assert meets_targets(instance, outcome)


# codebooks


def test_hadamard_small_orders():
    assert [c.levels for c in hadamard_codebook(1)] == [(0,)]
    assert [c.levels for c in hadamard_codebook(2)] == [(0, 0), (0, 1)]


def test_hadamard_columns_are_orthogonal():
    codebook = hadamard_codebook(8)
    signs = np.array([np.real(c.unit()) for c in codebook])
    assert len(codebook) == 8
    assert np.allclose(signs @ signs.T, 8.0 * np.eye(8))


@pytest.mark.parametrize("n", [6, 48])
def test_hadamard_unsupported_order(n):
    with pytest.raises(UnsupportedOrderError):
        hadamard_codebook(n)


def test_random_codebook_is_seeded():
    first = random_codebook(6, seed=9)
    assert first == random_codebook(6, seed=9)
    assert len(first) == 6
    assert all(c.bits == 1 and c.n == 6 for c in first)
    assert len(random_codebook(6, seed=9, size=3)) == 3


def test_codebook_select_returns_minimum(make_instance):
    instance = make_instance(50, m=4, n=8, k=2)
    codebook = hadamard_codebook(8)
    chosen = codebook_select(instance, codebook, PrecoderKind.ZF)
    powers = [zf_power(instance, c) for c in codebook]
    assert chosen.total_power == pytest.approx(min(powers), rel=1e-9)
    assert chosen.theta == codebook[int(np.argmin(powers))]


def test_codebook_select_all_infeasible(make_instance):
    instance = make_instance(51, m=1, n=4, k=2)
    with pytest.raises(AllInfeasibleError):
        codebook_select(instance, hadamard_codebook(4), PrecoderKind.ZF)


def test_evaluate_phases_infeasible_outcome(make_instance):
    instance = make_instance(52, m=1, n=4, k=2)
    outcome = evaluate_phases(instance, PhaseVector.zeros(4, 1), PrecoderKind.ZF)
    assert math.isinf(outcome.total_power)
    assert outcome.precoder is None
    assert not outcome.feasible
