"""
Logger Module.

Simple, generalized logging utility for the IRS simulator, plus a tracker
that accumulates per-solve statistics across a run.
"""

import logging
from datetime import datetime
from typing import Any

from pydantic import BaseModel, Field

# Configure logging
logging.basicConfig(
    level=logging.INFO,
    format="%(asctime)s | %(levelname)s | %(message)s",
    datefmt="%Y-%m-%d %H:%M:%S"
)
logger = logging.getLogger("irs-sim")


class SolveRecord(BaseModel):
    """Single record for one scheme solve on one channel draw."""
    scheme: str
    scenario: str = ""
    iterations: int = 0
    nodes_explored: int = 0
    wall_ms: float = 0.0
    feasible: bool = True
    timestamp: datetime = Field(default_factory=datetime.now)
    metadata: dict[str, Any] = Field(default_factory=dict)


class SolveTracker(BaseModel):
    """Tracks cumulative solver statistics across a run."""
    records: list[SolveRecord] = []

    @property
    def total_wall_ms(self) -> float:
        return sum(r.wall_ms for r in self.records)

    def add(self, record: SolveRecord) -> None:
        """Add a solve record."""
        self.records.append(record)

    def summary(self) -> dict:
        """Get a summary of all solves, grouped by scheme."""
        by_scheme: dict = {}
        for r in self.records:
            if r.scheme not in by_scheme:
                by_scheme[r.scheme] = {"solves": 0, "iterations": 0, "nodes": 0, "infeasible": 0, "wall_ms": 0.0}
            stats = by_scheme[r.scheme]
            stats["solves"] += 1
            stats["iterations"] += r.iterations
            stats["nodes"] += r.nodes_explored
            stats["infeasible"] += 0 if r.feasible else 1
            stats["wall_ms"] += r.wall_ms

        return {
            "by_scheme": by_scheme,
            "total_solves": len(self.records),
            "total_wall_ms": self.total_wall_ms,
        }

    def print_summary(self) -> None:
        """Print a formatted solve summary."""
        s = self.summary()
        log("=" * 50)
        log("SOLVE SUMMARY")
        for scheme, stats in s["by_scheme"].items():
            log(
                f"  {scheme}: {stats['solves']} solves, {stats['iterations']} sweeps, "
                f"{stats['nodes']:,} nodes, {stats['infeasible']} infeasible, {stats['wall_ms']:.0f} ms"
            )
        log(f"Total: {s['total_solves']} solves, {s['total_wall_ms']:.0f} ms")
        log("=" * 50)


# Global tracker holder (avoids global statement)
_tracker_holder: dict[str, SolveTracker] = {"tracker": SolveTracker()}


def get_tracker() -> SolveTracker:
    """Get the global solve tracker."""
    return _tracker_holder["tracker"]


def reset_tracker() -> None:
    """Reset the global solve tracker."""
    _tracker_holder["tracker"] = SolveTracker()


def log(message: str) -> None:
    """Log an info message."""
    logger.info(message)


def log_debug(message: str) -> None:
    """Log a debug message."""
    logger.debug(message)


def log_warning(message: str) -> None:
    """Log a warning message."""
    logger.warning(message)


def log_error(message: str) -> None:
    """Log an error message."""
    logger.error(message)


def log_solve(
    scheme: str,
    scenario: str = "",
    iterations: int = 0,
    nodes_explored: int = 0,
    wall_ms: float = 0.0,
    feasible: bool = True,
    **metadata: Any
) -> SolveRecord:
    """
    Record one scheme solve in the global tracker.

    Args:
        scheme: Scheme name (e.g., "refine", "optimal")
        scenario: Scenario name
        iterations: Refinement sweeps used
        nodes_explored: Branch-and-bound nodes or enumerated candidates
        wall_ms: Wall time of the solve in milliseconds
        feasible: False when the solve produced infinite power
        **metadata: Any additional metadata to keep

    Returns:
        The created SolveRecord
    """
    record = SolveRecord(
        scheme=scheme,
        scenario=scenario,
        iterations=iterations,
        nodes_explored=nodes_explored,
        wall_ms=wall_ms,
        feasible=feasible,
        metadata=metadata,
    )

    _tracker_holder["tracker"].add(record)

    log_debug(f"[{scenario}/{scheme}] {iterations} sweeps, {nodes_explored} nodes, {wall_ms:.1f} ms")
    if not feasible:
        log_debug(f"[{scenario}/{scheme}] infeasible draw")

    return record
