"""
Pydantic Schema Models for the propagation setup.

Geometry of the AP / IRS / user deployment, per-link propagation parameters,
one Monte-Carlo channel draw, and the discrete phase-shift vector.
"""

from __future__ import annotations

import math

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

Point3 = tuple[float, float, float]


class Geometry(BaseModel):
    """AP ULA along x, IRS URA in the y-z plane, single-antenna users."""
    model_config = ConfigDict(frozen=True)

    m_antennas: int = Field(ge=1)
    n_elements: int = Field(ge=1)
    n_y: int = Field(ge=1)
    n_z: int = Field(ge=1)
    ap_ref_position: Point3
    irs_ref_position: Point3
    user_positions: tuple[Point3, ...] = Field(min_length=1)
    element_spacing: float = Field(default=0.5, gt=0.0, description="Spacing in wavelengths")

    @model_validator(mode="after")
    def _check_grid(self) -> Geometry:
        if self.n_elements != self.n_y * self.n_z:
            raise ValueError(f"n_elements={self.n_elements} != n_y*n_z={self.n_y * self.n_z}")
        return self

    @property
    def n_users(self) -> int:
        return len(self.user_positions)


class LinkParams(BaseModel):
    """Large-scale and small-scale parameters of one link."""
    model_config = ConfigDict(frozen=True)

    path_loss_exponent: float = Field(ge=2.0)
    rician_factor: float = Field(ge=0.0, description="LoS/NLoS power ratio; inf is pure LoS")
    reference_loss_db: float = -30.0
    antenna_gain_dbi: float = 0.0

    @property
    def is_los_only(self) -> bool:
        return math.isinf(self.rician_factor)


class ChannelRealization(BaseModel):
    """
    One channel draw.

    Rows of ``h_d`` and ``h_r`` are the per-user vectors h_{d,k} (length M)
    and h_{r,k} (length N); ``g`` is the N x M AP-IRS matrix.
    """
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    g: np.ndarray
    h_d: np.ndarray
    h_r: np.ndarray

    @model_validator(mode="after")
    def _check_dims(self) -> ChannelRealization:
        if self.g.ndim != 2 or self.h_d.ndim != 2 or self.h_r.ndim != 2:
            raise ValueError("g, h_d and h_r must be 2-D arrays")
        n, m = self.g.shape
        if self.h_d.shape[1] != m:
            raise ValueError(f"h_d has {self.h_d.shape[1]} columns, expected M={m}")
        if self.h_r.shape[1] != n:
            raise ValueError(f"h_r has {self.h_r.shape[1]} columns, expected N={n}")
        if self.h_d.shape[0] != self.h_r.shape[0]:
            raise ValueError("h_d and h_r disagree on the number of users")
        return self

    @property
    def n_users(self) -> int:
        return self.h_d.shape[0]

    @property
    def n_antennas(self) -> int:
        return self.g.shape[1]

    @property
    def n_elements(self) -> int:
        return self.g.shape[0]


class PhaseVector(BaseModel):
    """
    N discrete phase shifts with resolution ``bits``.

    Element n applies theta_n = levels[n] * 2*pi / 2**bits with unit
    reflection amplitude.
    """
    model_config = ConfigDict(frozen=True)

    bits: int = Field(ge=1)
    levels: tuple[int, ...]

    @field_validator("levels", mode="before")
    @classmethod
    def _coerce_levels(cls, value: object) -> tuple[int, ...]:
        if isinstance(value, np.ndarray):
            return tuple(int(v) for v in value.tolist())
        return tuple(int(v) for v in value)  # type: ignore[union-attr]

    @model_validator(mode="after")
    def _check_levels(self) -> PhaseVector:
        n_levels = 2 ** self.bits
        for idx, level in enumerate(self.levels):
            if not 0 <= level < n_levels:
                raise ValueError(f"levels[{idx}]={level} outside 0..{n_levels - 1}")
        return self

    @classmethod
    def zeros(cls, n: int, bits: int) -> PhaseVector:
        return cls(bits=bits, levels=(0,) * n)

    @property
    def n(self) -> int:
        return len(self.levels)

    @property
    def n_levels(self) -> int:
        return 2 ** self.bits

    @property
    def step(self) -> float:
        return 2.0 * math.pi / self.n_levels

    def as_array(self) -> np.ndarray:
        return np.asarray(self.levels, dtype=np.int64)

    def radians(self) -> np.ndarray:
        return self.as_array() * self.step

    def unit(self) -> np.ndarray:
        """The reflection coefficients e^{j theta_n}."""
        return np.exp(1j * self.radians())

    def with_level(self, n: int, level: int) -> PhaseVector:
        levels = list(self.levels)
        levels[n] = level
        return PhaseVector(bits=self.bits, levels=levels)

    def at_bits(self, bits: int) -> PhaseVector:
        """The same phases expressed on a finer (or equal) level grid."""
        if bits < self.bits:
            raise ValueError(f"cannot express {self.bits}-bit phases with {bits} bits")
        factor = 2 ** (bits - self.bits)
        return PhaseVector(bits=bits, levels=tuple(level * factor for level in self.levels))
