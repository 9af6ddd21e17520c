"""
Pydantic Schema Models for precoders and phase-shift solvers.
"""

from __future__ import annotations

import math

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from src.schemas.channel import ChannelRealization, PhaseVector


class SinrSpec(BaseModel):
    """Per-user SINR targets (linear) and noise powers (watts)."""
    model_config = ConfigDict(frozen=True)

    targets: tuple[float, ...] = Field(min_length=1)
    noise_powers: tuple[float, ...] = Field(min_length=1)

    @model_validator(mode="after")
    def _check(self) -> SinrSpec:
        if len(self.targets) != len(self.noise_powers):
            raise ValueError("targets and noise_powers must have one entry per user")
        if any(t <= 0 for t in self.targets):
            raise ValueError("SINR targets must be positive")
        if any(s <= 0 for s in self.noise_powers):
            raise ValueError("noise powers must be positive")
        return self

    @classmethod
    def uniform(cls, n_users: int, target: float, noise_power: float) -> SinrSpec:
        """Same target and noise power for every user."""
        return cls(targets=(target,) * n_users, noise_powers=(noise_power,) * n_users)

    @property
    def n_users(self) -> int:
        return len(self.targets)

    def gamma(self) -> np.ndarray:
        return np.asarray(self.targets, dtype=float)

    def sigma2(self) -> np.ndarray:
        return np.asarray(self.noise_powers, dtype=float)


class Precoder(BaseModel):
    """M x K transmit matrix with columns w_k and its total power."""
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    w: np.ndarray
    total_power: float

    @model_validator(mode="after")
    def _check_power(self) -> Precoder:
        power = float(np.sum(np.abs(self.w) ** 2))
        if not math.isclose(power, self.total_power, rel_tol=1e-10, abs_tol=1e-300):
            raise ValueError(f"total_power {self.total_power} != sum ||w_k||^2 = {power}")
        return self

    @classmethod
    def from_matrix(cls, w: np.ndarray) -> Precoder:
        return cls(w=w, total_power=float(np.sum(np.abs(w) ** 2)))

    @property
    def powers(self) -> np.ndarray:
        return np.sum(np.abs(self.w) ** 2, axis=0)


class QuadraticForm(BaseModel):
    """
    Single-user objective v^H A v + 2 Re{v^H h_hat} + constant with
    v^H = (e^{j theta_1}, ..., e^{j theta_N}).
    """
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    a: np.ndarray
    h_hat: np.ndarray
    constant: float
    phi: np.ndarray | None = None  # N x M cascade, row n = conj(h_r[n]) g[n]

    @property
    def n(self) -> int:
        return self.h_hat.shape[0]


class IlpModel(BaseModel):
    """
    SOS1 integer-linear encoding of the single-user objective.

    ``x_coeffs[n]`` multiplies the SOS1 vector x_n, ``y_coeffs[p]`` multiplies
    y_{i,n} for ``pairs[p] == (i, n)`` with i < n. ``levels``, ``cosines`` and
    ``sines`` are the vectors a, c and s over the L phase levels.
    """
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    bits: int
    levels: np.ndarray
    cosines: np.ndarray
    sines: np.ndarray
    x_coeffs: np.ndarray
    pairs: tuple[tuple[int, int], ...]
    y_coeffs: np.ndarray
    constant: float = Field(description="sum_n A(n,n) + ||h_d||^2")

    @property
    def n_levels(self) -> int:
        return 2 ** self.bits


class GainOutcome(BaseModel):
    """Result of a single-user phase search: maximized channel power gain."""
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    theta: PhaseVector | None
    phases: np.ndarray
    gain: float
    gain_trace: list[float] = Field(default_factory=list)
    iterations: int = 0
    converged: bool = True
    nodes_explored: int = 0


class SolveOutcome(BaseModel):
    """AP transmit power with the phase shifts and precoder achieving it."""
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    total_power: float
    theta: PhaseVector | None
    phases: np.ndarray
    precoder: Precoder | None = None
    iterations: int = 0
    objective_trace: list[float] = Field(default_factory=list)
    converged: bool = True
    nodes_explored: int = 0

    @model_validator(mode="after")
    def _check_sentinel(self) -> SolveOutcome:
        if math.isinf(self.total_power) and self.precoder is not None:
            raise ValueError("an infinite-power outcome carries no precoder")
        return self

    @property
    def feasible(self) -> bool:
        return math.isfinite(self.total_power)


class MultiuserInstance(BaseModel):
    """Channels, SINR requirements and phase resolution of one power-minimization instance."""
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    channels: ChannelRealization
    spec: SinrSpec
    bits: int = Field(ge=1)

    @model_validator(mode="after")
    def _check_users(self) -> MultiuserInstance:
        if self.channels.n_users != self.spec.n_users:
            raise ValueError(
                f"channels carry {self.channels.n_users} users but spec has {self.spec.n_users}"
            )
        return self

    @property
    def n_levels(self) -> int:
        return 2 ** self.bits


class AsymptoticConfig(BaseModel):
    """Setting of the large-N received power analysis (M = 1, Rayleigh)."""
    model_config = ConfigDict(frozen=True)

    n_elements: int = Field(ge=1)
    bits: float = Field(ge=1, description="Phase resolution in bits; inf for continuous phases")
    rho_h: float = Field(default=1.0, gt=0.0)
    rho_g: float = Field(default=1.0, gt=0.0)
    trials: int = Field(default=10_000, ge=1)
    seed: int = 0

    @model_validator(mode="after")
    def _check_bits(self) -> AsymptoticConfig:
        if not math.isinf(self.bits) and self.bits != int(self.bits):
            raise ValueError("bits must be an integer or inf")
        return self


class MonteCarloEstimate(BaseModel):
    """Sample mean with its standard error."""
    model_config = ConfigDict(frozen=True)

    mean: float
    stderr: float
    trials: int
