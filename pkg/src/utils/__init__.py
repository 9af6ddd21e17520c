"""
Utility modules for the IRS simulator.

Contains logging helpers and the solve tracker.
"""

from .logger import (
    log,
    log_debug,
    log_warning,
    log_error,
    log_solve,
    get_tracker,
    reset_tracker,
    SolveTracker,
    SolveRecord,
)

__all__ = [
    "log",
    "log_debug",
    "log_warning",
    "log_error",
    "log_solve",
    "get_tracker",
    "reset_tracker",
    "SolveTracker",
    "SolveRecord",
]
