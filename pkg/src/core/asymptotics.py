"""
Large-N received power with quantized phase shifts.

Setting: single AP antenna, Rayleigh cascaded link h_r ~ CN(0, rho_h^2 I),
g ~ CN(0, rho_g^2 I), no direct link. Each continuous optimum
theta*_n = -(phi_n + psi_n) is quantized to b bits, and the received power
is |sum_n |h_r(n)||g(n)| e^{j err_n}|^2 with err_n the quantization error.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from src.core.su_phase import quantize_levels
from src.schemas.solver import AsymptoticConfig, MonteCarloEstimate

# Trials per chunk; each chunk has its own substream so results do not depend on workers
CHUNK_TRIALS = 10_000
# Cap on chunk_trials * N complex draws held at once
CHUNK_ELEMENTS = 2_000_000


def eta(bits: float) -> float:
    """(2^b / pi * sin(pi / 2^b))^2; 1 for continuous phases (bits = inf)."""
    if math.isinf(bits):
        return 1.0
    if bits < 1:
        raise ValueError("bits must be >= 1")
    levels = 2.0 ** bits
    return (levels / math.pi * math.sin(math.pi / levels)) ** 2


def eta_db(bits: float) -> float:
    return 10.0 * math.log10(eta(bits))


def pr_closed_form(cfg: AsymptoticConfig) -> float:
    """N rho_h^2 rho_g^2 + N (N - 1) (pi^2 rho_h^2 rho_g^2 / 16) eta(b)."""
    n = cfg.n_elements
    scale = cfg.rho_h ** 2 * cfg.rho_g ** 2
    return n * scale + n * (n - 1) * (math.pi ** 2 * scale / 16.0) * eta(cfg.bits)


def _chunk_rng(seed: int, chunk: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(chunk,)))


def _draw(rng: np.random.Generator, rows: int, n: int, rho: float) -> np.ndarray:
    return rho * (rng.standard_normal((rows, n)) + 1j * rng.standard_normal((rows, n))) / math.sqrt(2.0)


def _errors(h: np.ndarray, g: np.ndarray, bits: float) -> np.ndarray:
    """Wrapped quantization errors theta_hat - theta* in [-pi, pi)."""
    optimum = -(np.angle(h) + np.angle(g))
    if math.isinf(bits):
        return np.zeros(optimum.shape)
    step = 2.0 * math.pi / 2 ** int(bits)
    quantized = quantize_levels(optimum, int(bits)) * step
    return np.mod(quantized - optimum + math.pi, 2.0 * math.pi) - math.pi


def _chunk_rows(cfg: AsymptoticConfig) -> int:
    return max(1, min(CHUNK_TRIALS, CHUNK_ELEMENTS // cfg.n_elements))


def _chunk_sums(cfg: AsymptoticConfig, chunk: int) -> tuple[float, float]:
    """(sum P, sum P^2) over the trials of one chunk."""
    size = _chunk_rows(cfg)
    rows = min(size, cfg.trials - chunk * size)
    rng = _chunk_rng(cfg.seed, chunk)
    h = _draw(rng, rows, cfg.n_elements, cfg.rho_h)
    g = _draw(rng, rows, cfg.n_elements, cfg.rho_g)
    amplitude = np.abs(h) * np.abs(g)
    received = np.abs(np.sum(amplitude * np.exp(1j * _errors(h, g, cfg.bits)), axis=1)) ** 2
    return math.fsum(received.tolist()), math.fsum((received ** 2).tolist())


def monte_carlo_pr(cfg: AsymptoticConfig, workers: int = 1) -> MonteCarloEstimate:
    """
    Monte-Carlo mean received power and its standard error.

    Trials are split into fixed chunks with independent substreams and the
    chunk sums are combined with compensated summation, so the estimate is
    the same for any number of workers.

    Args:
        cfg: Setting (N, b, rho_h, rho_g, trials, seed)
        workers: Processes to spread chunks over; 1 runs inline
    """
    n_chunks = -(-cfg.trials // _chunk_rows(cfg))
    chunks = range(n_chunks)
    if workers > 1 and n_chunks > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            sums = list(pool.map(_chunk_sums, [cfg] * n_chunks, chunks))
    else:
        sums = [_chunk_sums(cfg, c) for c in chunks]

    total = math.fsum(s for s, _ in sums)
    total_sq = math.fsum(s for _, s in sums)
    mean = total / cfg.trials
    if cfg.trials > 1:
        variance = max(total_sq - cfg.trials * mean ** 2, 0.0) / (cfg.trials - 1)
        stderr = math.sqrt(variance / cfg.trials)
    else:
        stderr = math.inf
    return MonteCarloEstimate(mean=mean, stderr=stderr, trials=cfg.trials)


def quantization_errors(bits: int, samples: int, seed: int = 0) -> np.ndarray:
    """Quantization errors of the per-element continuous optimum over Rayleigh draws."""
    rng = _chunk_rng(seed, 0)
    h = _draw(rng, 1, samples, 1.0)
    g = _draw(rng, 1, samples, 1.0)
    return _errors(h, g, bits).reshape(-1)


def mean_phase_factor(bits: int, samples: int, seed: int = 0) -> MonteCarloEstimate:
    """Empirical E[cos err] (the real part of E[e^{j err}]) with its standard error."""
    cosines = np.cos(quantization_errors(bits, samples, seed))
    stderr = float(np.std(cosines, ddof=1) / math.sqrt(samples)) if samples > 1 else math.inf
    return MonteCarloEstimate(mean=float(np.mean(cosines)), stderr=stderr, trials=samples)


def power_gain_slope(
    bits: float,
    n_list: list[int],
    trials: int,
    seed: int = 0,
    closed_form: bool = False,
    workers: int = 1,
) -> float:
    """
    Least-squares slope of log P_r against log N.

    Uses pr_closed_form when ``closed_form`` is set, otherwise monte_carlo_pr.
    """
    if len(set(n_list)) < 3:
        raise ValueError("need at least three distinct N values")
    powers = []
    for n in n_list:
        cfg = AsymptoticConfig(n_elements=n, bits=bits, trials=trials, seed=seed)
        powers.append(pr_closed_form(cfg) if closed_form else monte_carlo_pr(cfg, workers).mean)
    slope, _ = np.polyfit(np.log(np.asarray(n_list, dtype=float)), np.log(powers), 1)
    return float(slope)
