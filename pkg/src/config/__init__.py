"""
Configuration module for the IRS simulator.

Provides scenario/scheme enums, physical defaults and experiment loading.
"""

from .enums import LinkName, PrecoderKind, Scenario, Scheme, SweepVariable
from .loader import (
    ConfigError,
    ExperimentConfig,
    apply_overrides,
    get_presets,
    load_experiment,
    load_preset,
    parse_experiment,
)

__all__ = [
    "LinkName",
    "PrecoderKind",
    "Scenario",
    "Scheme",
    "SweepVariable",
    "ConfigError",
    "ExperimentConfig",
    "apply_overrides",
    "get_presets",
    "load_experiment",
    "load_preset",
    "parse_experiment",
]
