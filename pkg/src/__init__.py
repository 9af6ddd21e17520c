"""
IRS discrete beamforming simulator.

Joint AP transmit precoding and discrete IRS phase-shift optimization for
power minimization under per-user SINR targets.
"""

from .config import ExperimentConfig, Scenario, Scheme, load_experiment, load_preset
from .services import get_scheme
from .utils import log, get_tracker, reset_tracker

__all__ = [
    # Config
    "ExperimentConfig",
    "Scenario",
    "Scheme",
    "load_experiment",
    "load_preset",
    # Services
    "get_scheme",
    # Utils
    "log",
    "get_tracker",
    "reset_tracker",
]
