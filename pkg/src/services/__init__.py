"""
Services module for the IRS simulator.

Provides the phase-scheme interface and factory.
"""

from .base import PhaseScheme, TrialContext
from .factory import get_scheme

__all__ = [
    "PhaseScheme",
    "TrialContext",
    "get_scheme",
]
