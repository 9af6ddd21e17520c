"""
Aggregation of per-trial powers.

Powers are averaged in the dB domain over feasible trials; infeasible trials
are counted separately. Standard errors are std / sqrt(n) of the dB values.
"""

from __future__ import annotations

import math
from itertools import groupby

import numpy as np

from src.config.defaults import watts_to_dbm

from .models import ResultRow, TrialRecord


def db_mean_stderr(values_dbm: list[float]) -> tuple[float, float]:
    """Mean and standard error of dB values; (inf, 0) for an empty list."""
    if not values_dbm:
        return math.inf, 0.0
    arr = np.asarray(values_dbm, dtype=float)
    stderr = float(np.std(arr, ddof=1) / math.sqrt(arr.size)) if arr.size > 1 else 0.0
    return float(np.mean(arr)), stderr


def aggregate(records: list[TrialRecord]) -> list[ResultRow]:
    """
    One row per (scheme, sweep value, bits), sorted by that key.

    Args:
        records: Per-trial records of one scenario

    Returns:
        Aggregated ResultRows.
    """
    rows = []
    ordered = sorted(records, key=lambda r: r.sort_key())
    for (scheme, sweep, bits), group in groupby(ordered, key=lambda r: (r.scheme, r.sweep, r.bits)):
        trials = list(group)
        feasible = [watts_to_dbm(r.power_w) for r in trials if r.feasible]
        mean_dbm, stderr_db = db_mean_stderr(feasible)
        rows.append(ResultRow(
            scenario=trials[0].scenario,
            scheme=scheme,
            sweep=sweep,
            bits=bits,
            power_dbm=mean_dbm,
            trials=len(trials),
            stderr_db=stderr_db,
            iters=float(np.mean([r.iterations for r in trials])),
            infeasible=len(trials) - len(feasible),
        ))
    return rows
