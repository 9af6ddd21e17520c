"""
Schema models for the IRS simulator.

Contains Pydantic models for the propagation setup and solver results.
"""

from .channel import ChannelRealization, Geometry, LinkParams, PhaseVector
from .solver import (
    AsymptoticConfig,
    GainOutcome,
    IlpModel,
    MonteCarloEstimate,
    MultiuserInstance,
    Precoder,
    QuadraticForm,
    SinrSpec,
    SolveOutcome,
)

__all__ = [
    "ChannelRealization",
    "Geometry",
    "LinkParams",
    "PhaseVector",
    "AsymptoticConfig",
    "GainOutcome",
    "IlpModel",
    "MonteCarloEstimate",
    "MultiuserInstance",
    "Precoder",
    "QuadraticForm",
    "SinrSpec",
    "SolveOutcome",
]
