"""
Pydantic models for experiment results.

These models capture per-trial scheme outcomes, the aggregated rows written
to CSV, and the run manifest.
"""

from __future__ import annotations

import math
from datetime import datetime
from typing import Any

from pydantic import BaseModel, Field, model_validator

CSV_COLUMNS = ["scenario", "scheme", "sweep", "bits", "power_dbm", "trials", "stderr_db", "iters", "infeasible"]


class TrialRecord(BaseModel):
    """One scheme run on one channel draw."""
    scenario: str
    scheme: str
    sweep: float = Field(description="Sweep value of this trial")
    bits: float
    trial: int = Field(ge=0)
    power_w: float = Field(description="AP transmit power in watts; inf when infeasible")
    iterations: int = 0
    nodes_explored: int = 0
    wall_ms: float = 0.0
    converged: bool = True
    trace: list[float] = Field(default_factory=list, description="Power after each refinement sweep")

    @property
    def feasible(self) -> bool:
        return math.isfinite(self.power_w)

    def sort_key(self) -> tuple[str, float, float, int]:
        return (self.scheme, self.sweep, self.bits, self.trial)


class ResultRow(BaseModel):
    """Aggregated result of one scheme at one sweep value and resolution."""
    scenario: str
    scheme: str
    sweep: float
    bits: float
    power_dbm: float = Field(description="Mean of per-trial dBm over feasible trials")
    trials: int = Field(ge=0)
    stderr_db: float = Field(ge=0.0)
    iters: float = Field(default=0.0, description="Mean iterations per trial")
    infeasible: int = Field(default=0, ge=0)

    @model_validator(mode="after")
    def _check_flagged(self) -> ResultRow:
        if not math.isfinite(self.power_dbm) and self.infeasible == 0:
            raise ValueError("a non-finite power must be flagged by infeasible trials")
        return self

    def csv_values(self) -> list[str]:
        return [
            self.scenario,
            self.scheme,
            repr(self.sweep),
            repr(self.bits),
            repr(self.power_dbm),
            str(self.trials),
            repr(self.stderr_db),
            repr(self.iters),
            str(self.infeasible),
        ]


class RunManifest(BaseModel):
    """Machine-readable description of one run."""
    name: str
    scenario: str
    seed: int
    config: dict[str, Any]
    versions: dict[str, str] = Field(default_factory=dict)
    started_at: datetime = Field(default_factory=datetime.now)
    wall_time_s: float = 0.0
    workers: int = 1
    n_rows: int = 0
    infeasible_trials: int = 0
    outputs: dict[str, str] = Field(default_factory=dict)


class RunResult(BaseModel):
    """Rows, per-trial records and manifest of a finished run."""
    rows: list[ResultRow]
    records: list[TrialRecord] = Field(default_factory=list)
    manifest: RunManifest
