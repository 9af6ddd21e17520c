"""
Base Scheme Protocol for phase-shift optimization.

Defines the unified interface that every compared scheme implements, and the
per-trial context handed to it.
"""

from typing import Protocol

from pydantic import BaseModel, ConfigDict, Field

from src.config.defaults import REFINEMENT_THRESHOLD
from src.schemas.channel import ChannelRealization
from src.schemas.solver import MultiuserInstance, SinrSpec, SolveOutcome


class TrialContext(BaseModel):
    """One channel draw with the requirements a scheme solves against."""
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    channels: ChannelRealization
    spec: SinrSpec
    bits: int = Field(ge=1)
    seed: int = Field(default=0, description="Seed for the random fallback codebook")
    node_budget: int = Field(default=2_000_000, ge=1)
    threshold: float = Field(default=REFINEMENT_THRESHOLD, gt=0.0, description="Refinement stopping threshold")

    def instance(self) -> MultiuserInstance:
        return MultiuserInstance(channels=self.channels, spec=self.spec, bits=self.bits)


class PhaseScheme(Protocol):
    """
    Unified interface for all phase-shift schemes.

    A scheme takes one channel draw and returns the AP transmit power it
    achieves, with the phase shifts and precoder behind it.
    """

    name: str

    def solve(self, ctx: TrialContext) -> SolveOutcome:
        """
        Solve one trial.

        Args:
            ctx: Channel draw, SINR requirements and phase resolution

        Returns:
            SolveOutcome; total_power is +inf when the scheme finds no
            feasible configuration.
        """
        ...
