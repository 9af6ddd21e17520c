"""Tests for the scheme factory and the compared schemes."""

import math

import numpy as np
import pytest

from src.config.enums import Scenario, Scheme
from src.schemas.solver import SinrSpec
from src.services import TrialContext, get_scheme
from src.services.schemes import multiuser, single_user

SINGLE = Scenario.SINGLE_USER_DISTANCE
MULTI = Scenario.MULTIUSER_SINR


@pytest.fixture
def single_ctx(make_channels):
    def _make(seed: int, n: int = 8, bits: int = 1) -> TrialContext:
        return TrialContext(
            channels=make_channels(seed, 4, n, 1),
            spec=SinrSpec.uniform(1, 10.0, 0.01),
            bits=bits,
            seed=seed,
        )

    return _make


@pytest.fixture
def multi_ctx(make_channels):
    def _make(seed: int, n: int = 4, k: int = 2, m: int = 4) -> TrialContext:
        return TrialContext(
            channels=make_channels(seed, m, n, k),
            spec=SinrSpec.uniform(k, 1.0, 0.1),
            bits=1,
            seed=seed,
        )

    return _make


def power(scheme: Scheme, scenario: Scenario, ctx: TrialContext) -> float:
    return get_scheme(scheme, scenario).solve(ctx).total_power


# factory


def test_factory_single_user():
    assert isinstance(get_scheme(Scheme.OPTIMAL, SINGLE), single_user.OptimalScheme)
    assert isinstance(get_scheme(Scheme.MMSE_REFINE, SINGLE), single_user.RefineScheme)
    assert isinstance(get_scheme(Scheme.NO_IRS, SINGLE), multiuser.NoIrsScheme)


def test_factory_multiuser():
    assert isinstance(get_scheme(Scheme.REFINE, MULTI), multiuser.ZfRefineScheme)
    assert isinstance(get_scheme(Scheme.MMSE_REFINE, MULTI), multiuser.MmseRefineScheme)
    assert get_scheme(Scheme.QUANTIZE, Scenario.MULTIUSER_ELEMENTS).name == "quantize"


def test_factory_rejects_unsupported():
    with pytest.raises(ValueError):
        get_scheme(Scheme.REFINE, Scenario.ASYMPTOTIC)
    with pytest.raises(ValueError):
        get_scheme(Scheme.REFINE, Scenario.MULTIUSER_ANTENNAS)
    assert get_scheme(Scheme.NO_IRS, Scenario.MULTIUSER_ANTENNAS).name == "no_irs"


# single user


@pytest.mark.parametrize("bits", [1, 2])
def test_single_user_ordering(single_ctx, bits):
    for seed in range(5):
        ctx = single_ctx(seed, bits=bits)
        optimum = power(Scheme.OPTIMAL, SINGLE, ctx)
        refined = power(Scheme.REFINE, SINGLE, ctx)
        assert optimum <= refined * (1.0 + 1e-9)
        assert refined <= power(Scheme.CODEBOOK, SINGLE, ctx) * (1.0 + 1e-9)
        assert optimum <= power(Scheme.QUANTIZE, SINGLE, ctx) * (1.0 + 1e-9)
        assert optimum <= power(Scheme.NO_IRS, SINGLE, ctx) * (1.0 + 1e-9)


def test_single_user_continuous_baseline(single_ctx):
    outcome = get_scheme(Scheme.CONTINUOUS_BASELINE, SINGLE).solve(single_ctx(1))
    assert outcome.feasible
    assert outcome.theta is None
    assert outcome.precoder is not None


def test_single_user_random_codebook_fallback(single_ctx):
    ctx = single_ctx(2, n=6)
    codebook = get_scheme(Scheme.CODEBOOK, SINGLE).solve(ctx)
    refined = get_scheme(Scheme.REFINE, SINGLE).solve(ctx)
    assert codebook.theta.n == 6
    assert refined.total_power <= codebook.total_power * (1.0 + 1e-9)


def test_no_irs_single_user_is_mrt(single_ctx):
    ctx = single_ctx(3)
    h_d = ctx.channels.h_d[0]
    outcome = get_scheme(Scheme.NO_IRS, SINGLE).solve(ctx)
    assert outcome.total_power == pytest.approx(10.0 * 0.01 / np.linalg.norm(h_d) ** 2)
    assert outcome.phases.size == 0


# multiuser


def test_multiuser_ordering(multi_ctx):
    for seed in range(5):
        ctx = multi_ctx(seed)
        optimum = power(Scheme.OPTIMAL, MULTI, ctx)
        codebook = power(Scheme.CODEBOOK, MULTI, ctx)
        assert optimum <= power(Scheme.MMSE_REFINE, MULTI, ctx) * (1.0 + 1e-9)
        assert power(Scheme.MMSE_REFINE, MULTI, ctx) <= codebook * (1.0 + 1e-9)
        assert optimum <= power(Scheme.REFINE, MULTI, ctx) * (1.0 + 1e-9)
        assert optimum <= power(Scheme.QUANTIZE, MULTI, ctx) * (1.0 + 1e-9)


def test_multiuser_continuous_and_fallback(multi_ctx):
    ctx = multi_ctx(7, n=6)
    continuous = get_scheme(Scheme.CONTINUOUS_BASELINE, MULTI).solve(ctx)
    assert continuous.feasible
    assert continuous.theta is None
    assert math.isfinite(power(Scheme.CODEBOOK, MULTI, ctx))


def test_multiuser_no_irs(multi_ctx):
    outcome = get_scheme(Scheme.NO_IRS, MULTI).solve(multi_ctx(8, m=4, k=3))
    assert outcome.feasible
    assert outcome.precoder.w.shape == (4, 3)


def test_multiuser_no_irs_infeasible(multi_ctx):
    ctx = TrialContext(
        channels=multi_ctx(9, m=1, k=2).channels,
        spec=SinrSpec.uniform(2, 10.0, 0.1),
        bits=1,
    )
    outcome = get_scheme(Scheme.NO_IRS, MULTI).solve(ctx)
    assert math.isinf(outcome.total_power)
    assert outcome.precoder is None


@pytest.mark.parametrize("gamma_db", [17.5, 25.0, 30.0])
def test_mmse_schemes_feasible_on_preset_draws(preset_context, gamma_db):
    for trial in range(3):
        ctx = preset_context("fig6a", gamma_db, trial)
        no_irs = power(Scheme.NO_IRS, MULTI, ctx)
        codebook = power(Scheme.CODEBOOK, MULTI, ctx)
        refined = power(Scheme.MMSE_REFINE, MULTI, ctx)
        assert math.isfinite(no_irs)
        assert math.isfinite(codebook)
        assert refined <= codebook * (1.0 + 1e-9)
