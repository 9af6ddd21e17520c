"""
Physical Defaults.

Propagation and system constants of the simulation setup, plus the unit
conversions used at the I/O boundaries. Powers are watts internally.
"""

import math

# Path loss at the 1 m reference distance (dB)
REFERENCE_LOSS_DB = -30.0

# Receiver noise power (dBm)
NOISE_POWER_DBM = -90.0

# AP reference antenna at (d_x, 0, 0), IRS reference element at (0, d_y, 0)
AP_X_M = 2.0
IRS_Y_M = 50.0

# Half-circle radii of the multiuser layout
IRS_USER_RADIUS_M = 2.0
AP_USER_RADIUS_M = 50.0

ELEMENT_SPACING_WAVELENGTHS = 0.5
IRS_ROWS_Y = 4

# Antenna gains (dBi)
AP_ANTENNA_GAIN_DBI = 0.0
IRS_ELEMENT_GAIN_DBI = 3.0

# Refinement stopping threshold
REFINEMENT_THRESHOLD = 1e-4

# Per-family link parameters: path loss exponent and Rician factor
LINK_DEFAULTS: dict[str, dict[str, dict[str, float]]] = {
    "single_user": {
        "ap_irs": {"path_loss_exponent": 2.2, "rician_factor": 0.0},
        "irs_user": {"path_loss_exponent": 2.8, "rician_factor": math.inf},
        "ap_user": {"path_loss_exponent": 3.5, "rician_factor": 0.0},
    },
    "multiuser": {
        "ap_irs": {"path_loss_exponent": 2.2, "rician_factor": math.inf},
        "irs_user": {"path_loss_exponent": 2.8, "rician_factor": 0.0},
        "ap_user": {"path_loss_exponent": 3.5, "rician_factor": 0.0},
    },
}


def db_to_linear(value_db: float) -> float:
    """Convert a dB ratio to linear scale."""
    return 10.0 ** (value_db / 10.0)


def linear_to_db(value: float) -> float:
    """Convert a linear ratio to dB. Returns +inf for +inf input."""
    if value == math.inf:
        return math.inf
    return 10.0 * math.log10(value)


def dbm_to_watts(value_dbm: float) -> float:
    """Convert dBm to watts."""
    return 10.0 ** ((value_dbm - 30.0) / 10.0)


def watts_to_dbm(value_w: float) -> float:
    """Convert watts to dBm. Returns +inf for +inf input."""
    if value_w == math.inf:
        return math.inf
    return 10.0 * math.log10(value_w) + 30.0


def get_link_defaults(single_user: bool) -> dict[str, dict[str, float]]:
    """
    Get the link parameter table for a scenario family.

    Args:
        single_user: True for the single-user layout, False for multiuser

    Returns:
        Dict keyed by link name with path loss exponent and Rician factor.
    """
    family = "single_user" if single_user else "multiuser"
    return {link: dict(values) for link, values in LINK_DEFAULTS[family].items()}
