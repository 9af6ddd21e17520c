"""Tests for the single-user phase-shift solvers."""

import math

import numpy as np
import pytest

from src.core.mu_phase import hadamard_codebook
from src.core.su_phase import (
    BudgetExceededError,
    build_quadratic,
    continuous_refinement,
    enumerate_optimal,
    mrt_outcome,
    objective,
    quantize,
    refine_element,
    solve_optimal,
    successive_refinement,
    upper_bound,
)
from src.core.precoding import sinr
from src.schemas.channel import PhaseVector
from src.schemas.solver import QuadraticForm, SinrSpec
from tests.conftest import crandn


def random_form(seed: int, m: int = 4, n: int = 6) -> tuple[QuadraticForm, tuple]:
    gen = np.random.default_rng(seed)
    g, h_r, h_d = crandn(gen, n, m), crandn(gen, n), 0.3 * crandn(gen, m)
    return build_quadratic(g, h_r, h_d), (g, h_r, h_d)


def single_element_form(h_hat: complex) -> QuadraticForm:
    return QuadraticForm(a=np.zeros((1, 1), dtype=complex), h_hat=np.array([h_hat]), constant=0.0)


# build_quadratic / objective


def test_build_quadratic_zero_reflection(rng):
    h_d = crandn(rng, 3)
    q = build_quadratic(crandn(rng, 4, 3), np.zeros(4), h_d)
    assert np.allclose(q.a, 0.0)
    assert np.allclose(q.h_hat, 0.0)
    assert q.constant == pytest.approx(float(np.linalg.norm(h_d) ** 2))


def test_build_quadratic_scalar():
    g, h_r, h_d = np.array([[2.0 - 1.0j]]), np.array([0.5 + 0.5j]), np.array([1.0 + 2.0j])
    q = build_quadratic(g, h_r, h_d)
    assert q.a[0, 0] == pytest.approx(abs(h_r[0]) ** 2 * abs(g[0, 0]) ** 2)
    assert q.h_hat[0] == pytest.approx(np.conj(h_r[0]) * g[0, 0] * h_d[0])


def test_quadratic_is_hermitian_psd():
    q, _ = random_form(5)
    assert np.allclose(q.a, np.conj(q.a).T, atol=1e-10)
    assert np.min(np.linalg.eigvalsh(q.a)) >= -1e-10


def test_objective_equals_combined_channel_norm(rng):
    q, (g, h_r, h_d) = random_form(11, m=4, n=8)
    for _ in range(100):
        theta = PhaseVector(bits=2, levels=rng.integers(0, 4, size=8))
        direct = np.conj(h_r) * theta.unit() @ g + np.conj(h_d)
        via_cascade = theta.unit() @ q.phi + np.conj(h_d)
        assert np.allclose(via_cascade, direct, atol=1e-12)
        assert objective(q, theta) == pytest.approx(float(np.linalg.norm(direct) ** 2), rel=1e-9)


def test_objective_constant_only():
    q = QuadraticForm(a=np.zeros((3, 3), dtype=complex), h_hat=np.zeros(3, dtype=complex), constant=2.5)
    assert objective(q, PhaseVector(bits=1, levels=(1, 0, 1))) == 2.5


def test_objective_single_element_best_level():
    # arg(h_hat) = 2.0 rad -> best rotation -2.0 rad, nearest 2-bit level is 3*pi/2
    q = single_element_form(np.exp(2.0j))
    values = [objective(q, PhaseVector(bits=2, levels=(lv,))) for lv in range(4)]
    assert int(np.argmax(values)) == 3


# refine_element


def test_refine_element_phi_third_pi():
    q = single_element_form(np.exp(-1j * math.pi / 3))
    assert refine_element(q, PhaseVector(bits=1, levels=(1,)), 0).levels == (0,)
    assert refine_element(q, PhaseVector(bits=1, levels=(0,)), 0).levels == (0,)


def test_refine_element_wraps_around():
    q = single_element_form(np.exp(-1j * 7 * math.pi / 4))
    assert refine_element(q, PhaseVector(bits=1, levels=(1,)), 0).levels == (0,)


def test_refine_element_zero_coefficient_keeps_level():
    q = single_element_form(0.0)
    theta = PhaseVector(bits=2, levels=(3,))
    assert refine_element(q, theta, 0) == theta


def test_refine_element_does_not_decrease_objective(rng):
    q, _ = random_form(2, n=6)
    theta = PhaseVector(bits=2, levels=rng.integers(0, 4, size=6))
    for n in range(6):
        updated = refine_element(q, theta, n)
        assert objective(q, updated) >= objective(q, theta) - 1e-12
        assert all(a == b for i, (a, b) in enumerate(zip(updated.levels, theta.levels)) if i != n)
        theta = updated


# successive / continuous refinement


def test_successive_refinement_single_element_is_optimal():
    q = single_element_form(np.exp(0.4j))
    found = successive_refinement(q, PhaseVector.zeros(1, 2))
    assert found.gain == pytest.approx(enumerate_optimal(q, 2).gain)
    assert found.iterations <= 2


def test_successive_refinement_fixed_point_at_optimum():
    q, _ = random_form(21, n=6)
    best = enumerate_optimal(q, 1)
    found = successive_refinement(q, best.theta)
    assert found.theta == best.theta
    assert found.iterations == 1


def test_successive_refinement_trace_monotone_and_bounded():
    for seed in range(10):
        q, _ = random_form(seed, n=8)
        found = successive_refinement(q, PhaseVector.zeros(8, 1))
        assert all(b >= a - 1e-12 for a, b in zip(found.gain_trace, found.gain_trace[1:]))
        assert len(found.gain_trace) - 1 >= sum(level != 0 for level in found.theta.levels)
        assert found.gain_trace[-1] == found.gain
        assert found.gain <= upper_bound(q) + 1e-9
        assert found.converged
        assert found.iterations <= 100


def test_continuous_refinement_aligns_single_antenna():
    gen = np.random.default_rng(8)
    g, h_r, h_d = crandn(gen, 6, 1), crandn(gen, 6), 0.3 * crandn(gen, 1)
    q = build_quadratic(g, h_r, h_d)
    found = continuous_refinement(q, threshold=1e-12)
    aligned = (float(np.sum(np.abs(h_r) * np.abs(g[:, 0]))) + abs(h_d[0])) ** 2
    assert found.gain == pytest.approx(aligned, rel=1e-6)
    assert found.theta is None


def test_continuous_refinement_diagonal_form_is_solved_in_one_sweep(rng):
    a = np.diag([1.0, 2.0, 0.5]).astype(complex)
    h_hat = crandn(rng, 3)
    q = QuadraticForm(a=a, h_hat=h_hat, constant=0.7)
    found = continuous_refinement(q)
    expected = 3.5 + 2.0 * float(np.sum(np.abs(h_hat))) + 0.7
    assert found.gain == pytest.approx(expected, rel=1e-12)
    assert found.gain_trace[1] == pytest.approx(expected, rel=1e-12)


def test_continuous_refinement_improves_on_discrete_solution():
    q, _ = random_form(4, n=8)
    discrete = successive_refinement(q, PhaseVector.zeros(8, 1))
    continuous = continuous_refinement(q, discrete.phases)
    assert continuous.gain >= discrete.gain - 1e-12


# quantize


def test_quantize_nearest_levels():
    assert quantize(np.array([0.9 * math.pi]), 1).levels == (1,)
    assert quantize(np.array([1.99 * math.pi]), 1).levels == (0,)
    assert quantize(np.array([math.pi / 2]), 1).levels == (0,)
    assert quantize(np.array([1.5 * math.pi]), 1).levels == (0,)
    assert quantize(np.array([1.75 * math.pi]), 2).levels == (0,)
    assert quantize(np.array([0.75 * math.pi]), 2).levels == (1,)
    assert quantize(np.array([-0.1]), 2).levels == (0,)


@pytest.mark.parametrize("bits", [1, 2, 3])
def test_quantize_error_bound(rng, bits):
    theta = rng.uniform(-10.0, 10.0, size=500)
    levels = quantize(theta, bits)
    err = np.angle(np.exp(1j * (levels.radians() - theta)))
    assert np.max(np.abs(err)) <= math.pi / 2 ** bits + 1e-12


# solve_optimal


def test_solve_optimal_single_element():
    q = single_element_form(2.0 * np.exp(-2.5j))
    found = solve_optimal(q, 2)
    scores = [np.real(np.exp(1j * lv * math.pi / 2) * q.h_hat[0]) for lv in range(4)]
    assert found.theta.levels == (int(np.argmax(scores)),)


def test_solve_optimal_decoupled(rng):
    h_hat = crandn(rng, 5)
    q = QuadraticForm(a=np.zeros((5, 5), dtype=complex), h_hat=h_hat, constant=1.0)
    found = solve_optimal(q, 2)
    expected = quantize(-np.angle(h_hat), 2)
    assert found.theta == expected


@pytest.mark.parametrize("bits", [1, 2])
def test_solve_optimal_matches_enumeration(bits):
    for seed in range(25):
        n = 3 + seed % 6
        q, _ = random_form(100 + seed, m=4, n=n)
        found = solve_optimal(q, bits)
        best = enumerate_optimal(q, bits)
        assert found.gain == pytest.approx(best.gain, rel=1e-9)
        assert found.nodes_explored >= 1


def test_solve_optimal_dominates_heuristics():
    for seed in range(10):
        q, _ = random_form(300 + seed, n=8)
        optimum = solve_optimal(q, 1).gain
        refined = successive_refinement(q, PhaseVector.zeros(8, 1)).gain
        quantized = objective(q, quantize(continuous_refinement(q).phases, 1))
        codebook = max(objective(q, c) for c in hadamard_codebook(8))
        assert optimum >= max(refined, quantized, codebook) - 1e-9


def test_solve_optimal_guard_refuses_large_instances():
    q, _ = random_form(1, n=16)
    with pytest.raises(BudgetExceededError) as info:
        solve_optimal(q, 2)
    assert info.value.incumbent is None


def test_solve_optimal_budget_returns_incumbent():
    q, _ = random_form(1, n=16)
    with pytest.raises(BudgetExceededError) as info:
        solve_optimal(q, 2, node_budget=1, force=True)
    incumbent = info.value.incumbent
    assert incumbent is not None
    assert not incumbent.converged
    assert incumbent.gain == pytest.approx(objective(q, incumbent.theta))


def test_refinement_gap_to_optimum_is_small():
    gaps = []
    for seed in range(50):
        bits = 1 + seed % 2
        n = 4 + seed % 5
        q, _ = random_form(500 + seed, m=4, n=n)
        optimum = solve_optimal(q, bits).gain
        refined = successive_refinement(q, PhaseVector.zeros(n, bits)).gain
        gaps.append(10.0 * math.log10(optimum / refined))
    assert min(gaps) >= -1e-9
    assert float(np.median(gaps)) <= 0.3
    assert max(gaps) <= 1.0


# mrt_outcome


def test_mrt_outcome_power_and_sinr():
    q, (g, h_r, h_d) = random_form(9, n=6)
    found = successive_refinement(q, PhaseVector.zeros(6, 1))
    gamma, sigma2 = 100.0, 1e-9
    outcome = mrt_outcome(g, h_r, h_d, found, gamma, sigma2)
    assert outcome.total_power == pytest.approx(gamma * sigma2 / found.gain, rel=1e-9)
    h = np.conj(np.conj(h_r) * np.exp(1j * found.phases) @ g + np.conj(h_d))
    assert sinr(h, outcome.precoder, SinrSpec.uniform(1, gamma, sigma2))[0] == pytest.approx(gamma, rel=1e-9)
    assert outcome.objective_trace[-1] == pytest.approx(outcome.total_power, rel=1e-9)
