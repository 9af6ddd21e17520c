"""
Experiment Runner

Runs every configured scheme on every (sweep value, resolution, trial) of an
experiment, re-checks SINR feasibility of each outcome, and aggregates the
results. Trials are independent and run in a process pool; records are
sorted before aggregation so output does not depend on the worker count.
"""

from __future__ import annotations

import math
import platform
import time
from concurrent.futures import ProcessPoolExecutor
from importlib import metadata

import numpy as np
import pydantic
import scipy

from src.config.defaults import db_to_linear, dbm_to_watts, linear_to_db
from src.config.enums import Scenario, SweepVariable
from src.config.loader import ExperimentConfig
from src.core.asymptotics import monte_carlo_pr, pr_closed_form
from src.core.channel import (
    combined_channels,
    default_links,
    generate,
    multiuser_geometry,
    single_user_geometry,
)
from src.core.mu_phase import AllInfeasibleError
from src.core.precoding import sinr
from src.schemas.solver import AsymptoticConfig, SinrSpec, SolveOutcome
from src.services import TrialContext, get_scheme
from src.utils.logger import log, log_solve, log_warning

from .aggregate import aggregate
from .models import ResultRow, RunManifest, RunResult, TrialRecord

SINR_RTOL = 1e-6


def build_context(cfg: ExperimentConfig, sweep_value: float, bits: int, trial: int) -> TrialContext:
    """
    Channel draw and requirements of one trial at one sweep point.

    The sweep value replaces the matching fixed parameter of the config.
    """
    m, n, k = cfg.m_antennas, cfg.n_elements, cfg.n_users
    distance, sinr_db = cfg.distance_m, cfg.sinr_db
    match cfg.sweep.variable:
        case SweepVariable.DISTANCE:
            distance = sweep_value
        case SweepVariable.N_ELEMENTS:
            n = int(sweep_value)
        case SweepVariable.SINR_DB:
            sinr_db = sweep_value
        case SweepVariable.N_USERS:
            k = int(sweep_value)
        case SweepVariable.M_ANTENNAS:
            m = int(sweep_value)

    single_user = cfg.scenario.is_single_user
    if single_user:
        geometry = single_user_geometry(m, n, distance)
    else:
        geometry = multiuser_geometry(m, n, cfg.users_for(k))
    links = default_links(single_user, cfg.link_overrides())
    channels = generate(geometry, links, cfg.seed, trial)
    spec = SinrSpec.uniform(geometry.n_users, db_to_linear(sinr_db), dbm_to_watts(cfg.noise_power_dbm))
    return TrialContext(
        channels=channels, spec=spec, bits=bits, seed=cfg.seed, node_budget=cfg.node_budget,
        threshold=cfg.threshold,
    )


def passes_sinr_check(ctx: TrialContext, outcome: SolveOutcome) -> bool:
    """Re-evaluate every user's SINR for a finite outcome."""
    if outcome.precoder is None:
        return False
    if outcome.phases.size == 0:
        h = ctx.channels.h_d
    else:
        h = combined_channels(ctx.channels, np.exp(1j * outcome.phases))
    achieved = sinr(h, outcome.precoder, ctx.spec)
    return bool(np.all(achieved >= ctx.spec.gamma() * (1.0 - SINR_RTOL)))


def run_trial(cfg: ExperimentConfig, sweep_value: float, bits: int, trial: int) -> list[TrialRecord]:
    """Every configured scheme on one channel draw."""
    ctx = build_context(cfg, sweep_value, bits, trial)
    records = []
    for scheme in cfg.schemes:
        solver = get_scheme(scheme, cfg.scenario)
        started = time.perf_counter()
        try:
            outcome = solver.solve(ctx)
        except AllInfeasibleError:
            outcome = SolveOutcome(total_power=math.inf, theta=None, phases=np.zeros(0))
        wall_ms = (time.perf_counter() - started) * 1000.0

        power = outcome.total_power
        if outcome.feasible and not passes_sinr_check(ctx, outcome):
            log_warning(f"[{scheme.value}] sweep={sweep_value} trial={trial}: SINR recheck failed")
            power = math.inf

        records.append(TrialRecord(
            scenario=cfg.scenario.value,
            scheme=scheme.value,
            sweep=float(sweep_value),
            bits=float(bits),
            trial=trial,
            power_w=power,
            iterations=outcome.iterations,
            nodes_explored=outcome.nodes_explored,
            wall_ms=wall_ms,
            converged=outcome.converged,
            trace=list(outcome.objective_trace),
        ))
    return records


def _versions() -> dict[str, str]:
    try:
        package = metadata.version("irs-discrete-beamforming")
    except metadata.PackageNotFoundError:
        package = "unknown"
    return {
        "irs-discrete-beamforming": package,
        "python": platform.python_version(),
        "numpy": np.__version__,
        "scipy": scipy.__version__,
        "pydantic": pydantic.VERSION,
    }


def _asymptotic_rows(cfg: ExperimentConfig) -> list[ResultRow]:
    """Received-power rows (dB relative to rho_h^2 rho_g^2 = 1) of the large-N analysis."""
    rows = []
    for bits in cfg.bits:
        for n in cfg.sweep.values:
            acfg = AsymptoticConfig(
                n_elements=int(n),
                bits=bits,
                rho_h=cfg.asymptotic.rho_h,
                rho_g=cfg.asymptotic.rho_g,
                trials=cfg.trials,
                seed=cfg.seed,
            )
            estimate = monte_carlo_pr(acfg, workers=cfg.workers)
            stderr_db = 10.0 / math.log(10.0) * estimate.stderr / estimate.mean if cfg.trials > 1 else 0.0
            rows.append(ResultRow(
                scenario=cfg.scenario.value,
                scheme="monte_carlo",
                sweep=float(n),
                bits=float(bits),
                power_dbm=linear_to_db(estimate.mean),
                trials=cfg.trials,
                stderr_db=stderr_db,
            ))
            if cfg.asymptotic.closed_form:
                rows.append(ResultRow(
                    scenario=cfg.scenario.value,
                    scheme="closed_form",
                    sweep=float(n),
                    bits=float(bits),
                    power_dbm=linear_to_db(pr_closed_form(acfg)),
                    trials=0,
                    stderr_db=0.0,
                ))
    return sorted(rows, key=lambda r: (r.scheme, r.sweep, r.bits))


def run(cfg: ExperimentConfig) -> RunResult:
    """
    Run an experiment.

    Args:
        cfg: Validated experiment configuration

    Returns:
        RunResult with aggregated rows, sorted per-trial records and manifest.

    Raises:
        BudgetExceededError: if an exact solver refuses or exhausts its budget.
    """
    name = cfg.name or cfg.scenario.value
    log("=" * 70)
    log(f"EXPERIMENT: {name} ({cfg.scenario.value})")
    log(f"Sweep {cfg.sweep.variable.value}: {cfg.sweep.values}")
    log(f"Bits: {cfg.bits}, trials: {cfg.trials}, seed: {cfg.seed}, workers: {cfg.workers}")
    log("=" * 70)

    started = time.perf_counter()
    records: list[TrialRecord] = []
    if cfg.scenario == Scenario.ASYMPTOTIC:
        rows = _asymptotic_rows(cfg)
    else:
        tasks = [
            (value, int(bits), trial)
            for value in cfg.sweep.values
            for bits in cfg.bits
            for trial in range(cfg.trials)
        ]
        if cfg.workers > 1:
            with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
                batches = pool.map(
                    run_trial,
                    [cfg] * len(tasks),
                    *zip(*tasks),
                    chunksize=max(1, len(tasks) // (4 * cfg.workers)),
                )
                for batch in batches:
                    records.extend(batch)
        else:
            for value, bits, trial in tasks:
                records.extend(run_trial(cfg, value, bits, trial))

        records.sort(key=lambda r: r.sort_key())
        for r in records:
            log_solve(
                r.scheme,
                scenario=r.scenario,
                iterations=r.iterations,
                nodes_explored=r.nodes_explored,
                wall_ms=r.wall_ms,
                feasible=r.feasible,
            )
        rows = aggregate(records)

    manifest = RunManifest(
        name=name,
        scenario=cfg.scenario.value,
        seed=cfg.seed,
        config=cfg.model_dump(mode="json"),
        versions=_versions(),
        wall_time_s=time.perf_counter() - started,
        workers=cfg.workers,
        n_rows=len(rows),
        infeasible_trials=sum(0 if r.feasible else 1 for r in records),
    )
    log(f"Finished {name}: {len(rows)} rows in {manifest.wall_time_s:.1f} s")
    return RunResult(rows=rows, records=records, manifest=manifest)
