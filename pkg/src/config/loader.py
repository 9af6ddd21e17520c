"""
Experiment Configuration Loader.

Loads and validates experiment documents (YAML or JSON) and the named presets
shipped in presets.yaml.
"""

from __future__ import annotations

import math
from pathlib import Path
from typing import Any

import yaml  # type: ignore[import-untyped]
from pydantic import BaseModel, Field, ValidationError, field_validator, model_validator

from .defaults import NOISE_POWER_DBM, REFINEMENT_THRESHOLD
from .enums import SCENARIO_SWEEP, LinkName, Scenario, Scheme, SweepVariable

PRESETS_PATH = Path(__file__).parent / "presets.yaml"

# Interleaved near/far order used when sweeping the number of users
USER_SWEEP_ORDER = [0, 4, 1, 5, 2, 6, 3, 7]
N_LAYOUT_USERS = 8


class ConfigError(Exception):
    """Raised for an invalid experiment configuration; ``path`` names the field."""

    def __init__(self, message: str, path: str = ""):
        super().__init__(f"{path}: {message}" if path else message)
        self.path = path


def _parse_inf(value: Any) -> Any:
    """Accept "inf" / "continuous" strings where JSON cannot spell infinity."""
    if isinstance(value, str) and value.strip().lower() in {"inf", "+inf", "infinity", ".inf", "continuous"}:
        return math.inf
    return value


class LinkOverride(BaseModel):
    """Override of one link's large- and small-scale parameters."""
    path_loss_exponent: float | None = Field(default=None, ge=2.0)
    rician_factor: float | None = Field(default=None, ge=0.0, description="inf for pure LoS")

    @field_validator("rician_factor", mode="before")
    @classmethod
    def _inf(cls, value: Any) -> Any:
        return _parse_inf(value)


class SweepConfig(BaseModel):
    """The x-axis of an experiment."""
    variable: SweepVariable | None = Field(default=None, description="Defaults to the scenario's variable")
    values: list[float] = Field(min_length=1)

    @field_validator("values")
    @classmethod
    def _increasing(cls, values: list[float]) -> list[float]:
        if any(b <= a for a, b in zip(values, values[1:])):
            raise ValueError("sweep values must be strictly increasing")
        return values


class AsymptoticSettings(BaseModel):
    """Channel scales of the large-N analysis."""
    rho_h: float = Field(default=1.0, gt=0.0)
    rho_g: float = Field(default=1.0, gt=0.0)
    closed_form: bool = Field(default=True, description="Also emit closed-form rows")


class OutputConfig(BaseModel):
    """Output settings configuration."""
    out_dir: str = "output"
    raw_dump: bool = Field(default=False, description="Write per-trial powers and traces")


class ExperimentConfig(BaseModel):
    """One experiment: a scenario, its fixed parameters and a sweep."""
    name: str = ""
    scenario: Scenario
    m_antennas: int = Field(default=4, ge=1)
    n_elements: int = Field(default=16, ge=1)
    n_users: int = Field(default=1, ge=1, le=N_LAYOUT_USERS)
    user_order: list[int] | None = Field(
        default=None, description="Layout users (0-based) taken in order; K uses the first K"
    )
    distance_m: float = Field(default=50.0, description="Single-user position along y")
    sinr_db: float = 25.0
    noise_power_dbm: float = NOISE_POWER_DBM
    links: dict[LinkName, LinkOverride] = Field(default_factory=dict)
    sweep: SweepConfig
    schemes: list[Scheme] = Field(default_factory=list)
    bits: list[float] = Field(default_factory=lambda: [1.0], min_length=1)
    threshold: float = Field(default=REFINEMENT_THRESHOLD, gt=0.0)
    node_budget: int = Field(default=2_000_000, ge=1)
    trials: int = Field(default=200, ge=1)
    seed: int = 0
    workers: int = Field(default=1, ge=1)
    asymptotic: AsymptoticSettings = Field(default_factory=AsymptoticSettings)
    output: OutputConfig = Field(default_factory=OutputConfig)

    @field_validator("bits", mode="before")
    @classmethod
    def _bits_inf(cls, value: Any) -> Any:
        if isinstance(value, (list, tuple)):
            return [_parse_inf(v) for v in value]
        return [_parse_inf(value)]

    @field_validator("bits")
    @classmethod
    def _bits_valid(cls, value: list[float]) -> list[float]:
        for b in value:
            if b < 1 or (math.isfinite(b) and b != int(b)):
                raise ValueError(f"bits must be integers >= 1 or inf, got {b}")
        return value

    @field_validator("user_order")
    @classmethod
    def _users_valid(cls, value: list[int] | None) -> list[int] | None:
        if value is not None:
            if len(set(value)) != len(value) or any(not 0 <= u < N_LAYOUT_USERS for u in value):
                raise ValueError(f"user_order must list distinct users in 0..{N_LAYOUT_USERS - 1}")
        return value

    @model_validator(mode="after")
    def _check_scenario(self) -> ExperimentConfig:
        expected = SCENARIO_SWEEP[self.scenario]
        if self.sweep.variable is None:
            self.sweep.variable = expected
        elif self.sweep.variable != expected:
            raise ValueError(f"scenario {self.scenario.value} sweeps {expected.value}, not {self.sweep.variable.value}")

        if self.scenario != Scenario.ASYMPTOTIC and any(math.isinf(b) for b in self.bits):
            raise ValueError("bits = inf is only meaningful for the asymptotic scenario")
        if self.scenario != Scenario.ASYMPTOTIC and not self.schemes:
            raise ValueError("at least one scheme is required")
        if self.scenario == Scenario.MULTIUSER_ANTENNAS and any(s != Scheme.NO_IRS for s in self.schemes):
            raise ValueError("the multiuser_antennas scenario only runs the no_irs scheme")

        if expected in (SweepVariable.N_ELEMENTS, SweepVariable.N_USERS, SweepVariable.M_ANTENNAS):
            if any(v != int(v) or v < 1 for v in self.sweep.values):
                raise ValueError(f"{expected.value} sweep values must be positive integers")
        if expected == SweepVariable.N_USERS and max(self.sweep.values) > len(self.users_pool()):
            raise ValueError(f"cannot place more than {len(self.users_pool())} users")
        if self.scenario.is_single_user and self.n_users != 1:
            raise ValueError("single-user scenarios have n_users = 1")
        return self

    def users_pool(self) -> list[int]:
        if self.user_order is not None:
            return self.user_order
        if self.scenario == Scenario.MULTIUSER_USERS:
            return USER_SWEEP_ORDER
        return list(range(N_LAYOUT_USERS))

    def users_for(self, k: int) -> list[int]:
        """The first k users of the configured order."""
        return self.users_pool()[:k]

    def link_overrides(self) -> dict[str, dict[str, float]]:
        """Non-empty link overrides keyed by link name."""
        return {
            link.value: values
            for link, override in self.links.items()
            if (values := override.model_dump(exclude_none=True))
        }


# Global presets holder (avoids global statement)
_presets_holder: dict[str, Any] = {"presets": None}


def _error_path(error: ValidationError) -> tuple[str, str]:
    first = error.errors()[0]
    return ".".join(str(part) for part in first["loc"]), first["msg"]


def parse_experiment(data: dict[str, Any]) -> ExperimentConfig:
    """
    Validate a raw experiment document.

    Raises:
        ConfigError: with the dotted path of the first invalid field.
    """
    if not isinstance(data, dict):
        raise ConfigError("experiment document must be a mapping")
    try:
        return ExperimentConfig.model_validate(data)
    except ValidationError as e:
        path, message = _error_path(e)
        raise ConfigError(message, path) from e


def load_experiment(config_path: str | Path) -> ExperimentConfig:
    """
    Load an experiment from a YAML or JSON file.

    Args:
        config_path: Path to the experiment document

    Returns:
        Validated ExperimentConfig

    Raises:
        ConfigError: if the document is malformed or invalid.
        OSError: if the file cannot be read.
    """
    config_path = Path(config_path)
    with open(config_path, "r", encoding="utf-8") as f:
        try:
            raw = yaml.safe_load(f)
        except yaml.YAMLError as e:
            raise ConfigError(f"cannot parse {config_path}: {e}") from e
    if raw is None:
        raise ConfigError(f"{config_path} is empty")
    return parse_experiment(raw)


def get_presets() -> dict[str, dict[str, Any]]:
    """
    Get the raw preset documents keyed by name.

    Loads presets.yaml on first use.
    """
    if _presets_holder["presets"] is None:
        with open(PRESETS_PATH, "r", encoding="utf-8") as f:
            _presets_holder["presets"] = yaml.safe_load(f) or {}
    return _presets_holder["presets"]


def load_preset(name: str) -> ExperimentConfig:
    """
    Load a named preset.

    Raises:
        ConfigError: if no preset has that name.
    """
    presets = get_presets()
    if name not in presets:
        raise ConfigError(f"unknown preset {name!r}; available: {', '.join(sorted(presets))}", "preset")
    return parse_experiment({"name": name, **presets[name]})


def apply_overrides(config: ExperimentConfig, **overrides: Any) -> ExperimentConfig:
    """
    Override top-level fields (None values are ignored) and re-validate.

    ``out`` sets the output directory.
    """
    data = config.model_dump()
    out = overrides.pop("out", None)
    if out is not None:
        data["output"]["out_dir"] = str(out)
    data.update({key: value for key, value in overrides.items() if value is not None})
    return parse_experiment(data)
