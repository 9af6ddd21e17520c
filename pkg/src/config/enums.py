"""
Scenario, scheme and precoder enums for the IRS simulator.

These enums define the experiment scenarios, the phase-shift schemes that can
be compared, and the inner precoders used to turn phase shifts into AP power.
"""

from enum import Enum


class Scenario(str, Enum):
    """Available experiment scenarios."""
    SINGLE_USER_DISTANCE = "single_user_distance"
    SINGLE_USER_ELEMENTS = "single_user_elements"
    MULTIUSER_SINR = "multiuser_sinr"
    MULTIUSER_USERS = "multiuser_users"
    MULTIUSER_ELEMENTS = "multiuser_elements"
    MULTIUSER_ANTENNAS = "multiuser_antennas"
    ASYMPTOTIC = "asymptotic"

    @property
    def is_single_user(self) -> bool:
        return self in (Scenario.SINGLE_USER_DISTANCE, Scenario.SINGLE_USER_ELEMENTS)


class Scheme(str, Enum):
    """Phase-shift schemes compared by the harness."""
    OPTIMAL = "optimal"
    REFINE = "refine"
    MMSE_REFINE = "mmse_refine"
    QUANTIZE = "quantize"
    CODEBOOK = "codebook"
    NO_IRS = "no_irs"
    CONTINUOUS_BASELINE = "continuous_baseline"


class PrecoderKind(str, Enum):
    """Inner transmit precoder used for a fixed phase configuration."""
    MMSE = "mmse"
    ZF = "zf"


class SweepVariable(str, Enum):
    """Quantity varied along the x-axis of an experiment."""
    DISTANCE = "distance"
    N_ELEMENTS = "n_elements"
    SINR_DB = "sinr_db"
    N_USERS = "n_users"
    M_ANTENNAS = "m_antennas"


class LinkName(str, Enum):
    """The three propagation links of the AP/IRS/user geometry."""
    AP_IRS = "ap_irs"
    IRS_USER = "irs_user"
    AP_USER = "ap_user"


# Sweep variable implied by each scenario
SCENARIO_SWEEP: dict[Scenario, SweepVariable] = {
    Scenario.SINGLE_USER_DISTANCE: SweepVariable.DISTANCE,
    Scenario.SINGLE_USER_ELEMENTS: SweepVariable.N_ELEMENTS,
    Scenario.MULTIUSER_SINR: SweepVariable.SINR_DB,
    Scenario.MULTIUSER_USERS: SweepVariable.N_USERS,
    Scenario.MULTIUSER_ELEMENTS: SweepVariable.N_ELEMENTS,
    Scenario.MULTIUSER_ANTENNAS: SweepVariable.M_ANTENNAS,
    Scenario.ASYMPTOTIC: SweepVariable.N_ELEMENTS,
}
