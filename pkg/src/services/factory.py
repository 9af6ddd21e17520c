"""
Scheme Factory.

Provides a strategy-based factory that returns the scheme implementation for
a scheme name and scenario family.
"""

from src.config.enums import Scenario, Scheme

from .base import PhaseScheme
from .schemes import multiuser, single_user


def get_scheme(scheme: Scheme, scenario: Scenario) -> PhaseScheme:
    """
    Get the implementation of a scheme for a scenario.

    Single-user scenarios use the channel-gain solvers with MRT; multiuser
    scenarios use the joint precoding solvers. ``mmse_refine`` in a
    single-user scenario is plain refinement, since MMSE reduces to MRT.

    Args:
        scheme: Scheme enum value
        scenario: Scenario the scheme runs in

    Returns:
        PhaseScheme implementation.

    Raises:
        ValueError: If the scheme is not available for the scenario.
    """
    if scenario == Scenario.ASYMPTOTIC:
        raise ValueError("the asymptotic scenario has no phase-shift schemes")

    if scenario.is_single_user:
        match scheme:
            case Scheme.OPTIMAL:
                return single_user.OptimalScheme()
            case Scheme.REFINE | Scheme.MMSE_REFINE:
                return single_user.RefineScheme()
            case Scheme.QUANTIZE:
                return single_user.QuantizeScheme()
            case Scheme.CODEBOOK:
                return single_user.CodebookScheme()
            case Scheme.CONTINUOUS_BASELINE:
                return single_user.ContinuousBaselineScheme()
            case Scheme.NO_IRS:
                return multiuser.NoIrsScheme()
            case _:
                raise ValueError(f"Unsupported scheme: {scheme}")

    if scenario == Scenario.MULTIUSER_ANTENNAS and scheme != Scheme.NO_IRS:
        raise ValueError(f"scenario {scenario.value} only supports the no_irs scheme")

    match scheme:
        case Scheme.OPTIMAL:
            return multiuser.OptimalScheme()
        case Scheme.REFINE:
            return multiuser.ZfRefineScheme()
        case Scheme.MMSE_REFINE:
            return multiuser.MmseRefineScheme()
        case Scheme.QUANTIZE:
            return multiuser.QuantizeScheme()
        case Scheme.CODEBOOK:
            return multiuser.CodebookScheme()
        case Scheme.CONTINUOUS_BASELINE:
            return multiuser.ContinuousBaselineScheme()
        case Scheme.NO_IRS:
            return multiuser.NoIrsScheme()
        case _:
            raise ValueError(f"Unsupported scheme: {scheme}")
