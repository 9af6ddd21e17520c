"""
Channel generation over the AP / IRS / user geometry.

Each link is sqrt(path loss) times a Rician small-scale component whose LoS
part is a far-field planar-wave array response built from the geometry.
Draws are reproducible per (seed, trial, link) through independent numpy
SeedSequence substreams, so trials can run in any order or process.
"""

from __future__ import annotations

import math

import numpy as np

from src.config.defaults import (
    AP_ANTENNA_GAIN_DBI,
    AP_USER_RADIUS_M,
    AP_X_M,
    ELEMENT_SPACING_WAVELENGTHS,
    IRS_ELEMENT_GAIN_DBI,
    IRS_ROWS_Y,
    IRS_USER_RADIUS_M,
    IRS_Y_M,
    REFERENCE_LOSS_DB,
    db_to_linear,
    get_link_defaults,
)
from src.config.enums import LinkName
from src.core.linalg import ComplexVector
from src.schemas.channel import ChannelRealization, Geometry, LinkParams, PhaseVector

# Substream index of each link within a trial
_LINK_STREAM: dict[LinkName, int] = {
    LinkName.AP_IRS: 0,
    LinkName.IRS_USER: 1,
    LinkName.AP_USER: 2,
}

def path_loss_linear(d: float, p: LinkParams) -> float:
    """
    Distance-dependent power gain C0 * (d / 1 m)^-alpha, times the link's
    antenna gain.
    """
    if d <= 0:
        raise ValueError(f"distance must be positive, got {d}")
    return db_to_linear(p.reference_loss_db) * d ** (-p.path_loss_exponent) * db_to_linear(p.antenna_gain_dbi)


def rician_weights(rician_factor: float) -> tuple[float, float]:
    """Amplitude weights (LoS, NLoS) for a Rician factor; inf is pure LoS."""
    if math.isinf(rician_factor):
        return 1.0, 0.0
    return math.sqrt(rician_factor / (1.0 + rician_factor)), math.sqrt(1.0 / (1.0 + rician_factor))


def irs_grid(n_elements: int) -> tuple[int, int]:
    """(n_y, n_z) for an IRS of n elements: 4 rows along y when n allows it."""
    if n_elements % IRS_ROWS_Y == 0:
        return IRS_ROWS_Y, n_elements // IRS_ROWS_Y
    return 1, n_elements


def ula_offsets(m: int, spacing: float) -> np.ndarray:
    """AP antenna offsets from the reference antenna, in wavelengths (along x)."""
    offsets = np.zeros((m, 3))
    offsets[:, 0] = np.arange(m) * spacing
    return offsets


def ura_offsets(n_y: int, n_z: int, spacing: float) -> np.ndarray:
    """IRS element offsets in wavelengths; element n = iz * n_y + iy."""
    iz, iy = np.divmod(np.arange(n_y * n_z), n_y)
    offsets = np.zeros((n_y * n_z, 3))
    offsets[:, 1] = iy * spacing
    offsets[:, 2] = iz * spacing
    return offsets


def array_response(offsets: np.ndarray, direction: np.ndarray) -> ComplexVector:
    """Planar-wave response exp(j 2 pi <u, offset>) with unit-magnitude entries."""
    unit = direction / np.linalg.norm(direction)
    return np.exp(2j * math.pi * (offsets @ unit))


def _nlos(rng: np.random.Generator, shape: tuple[int, ...]) -> np.ndarray:
    """i.i.d. CN(0, 1) entries."""
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / math.sqrt(2.0)


def _link_rng(seed: int, trial: int, link: LinkName, user: int = 0) -> np.random.Generator:
    key = (trial, _LINK_STREAM[link], user)
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=key))


def generate(
    geometry: Geometry,
    links: dict[LinkName, LinkParams],
    seed: int,
    trial: int,
) -> ChannelRealization:
    """
    Draw one channel realization.

    Args:
        geometry: AP / IRS / user placement
        links: Parameters of the AP-IRS, IRS-user and AP-user links
        seed: Experiment seed
        trial: Monte-Carlo trial index

    Returns:
        ChannelRealization with g (N x M), h_d (K x M) and h_r (K x N).
    """
    m, n, k = geometry.m_antennas, geometry.n_elements, geometry.n_users
    ap = np.asarray(geometry.ap_ref_position, dtype=float)
    irs = np.asarray(geometry.irs_ref_position, dtype=float)
    users = np.asarray(geometry.user_positions, dtype=float)
    ap_off = ula_offsets(m, geometry.element_spacing)
    irs_off = ura_offsets(geometry.n_y, geometry.n_z, geometry.element_spacing)

    # AP -> IRS
    p = links[LinkName.AP_IRS]
    rng = _link_rng(seed, trial, LinkName.AP_IRS)
    w_los, w_nlos = rician_weights(p.rician_factor)
    g_los = np.outer(array_response(irs_off, ap - irs), np.conj(array_response(ap_off, irs - ap)))
    g_nlos = _nlos(rng, (n, m))
    g = math.sqrt(path_loss_linear(float(np.linalg.norm(irs - ap)), p)) * (w_los * g_los + w_nlos * g_nlos)

    # IRS -> users
    p = links[LinkName.IRS_USER]
    w_los, w_nlos = rician_weights(p.rician_factor)
    h_r = np.empty((k, n), dtype=np.complex128)
    for u in range(k):
        nlos = _nlos(_link_rng(seed, trial, LinkName.IRS_USER, u), (n,))
        d = float(np.linalg.norm(users[u] - irs))
        los = array_response(irs_off, users[u] - irs)
        h_r[u] = math.sqrt(path_loss_linear(d, p)) * (w_los * los + w_nlos * nlos)

    # AP -> users
    p = links[LinkName.AP_USER]
    w_los, w_nlos = rician_weights(p.rician_factor)
    h_d = np.empty((k, m), dtype=np.complex128)
    for u in range(k):
        nlos = _nlos(_link_rng(seed, trial, LinkName.AP_USER, u), (m,))
        d = float(np.linalg.norm(users[u] - ap))
        los = array_response(ap_off, users[u] - ap)
        h_d[u] = math.sqrt(path_loss_linear(d, p)) * (w_los * los + w_nlos * nlos)

    return ChannelRealization(g=g, h_d=h_d, h_r=h_r)


def combined_channels(ch: ChannelRealization, reflection: np.ndarray) -> np.ndarray:
    """
    All combined channels for reflection coefficients e^{j theta_n}.

    Returns:
        K x M array whose row k is h_k, with h_k^H = h_{r,k}^H Theta G + h_{d,k}^H.
    """
    h_herm = (np.conj(ch.h_r) * reflection[np.newaxis, :]) @ ch.g + np.conj(ch.h_d)
    return np.conj(h_herm)


def combined_channel(ch: ChannelRealization, theta: PhaseVector, k: int) -> ComplexVector:
    """Combined channel h_k of user k for discrete phase shifts theta."""
    if theta.n != ch.n_elements:
        raise ValueError(f"theta has {theta.n} elements, channel has {ch.n_elements}")
    reflection = theta.unit()
    h_herm = (np.conj(ch.h_r[k]) * reflection) @ ch.g + np.conj(ch.h_d[k])
    return np.conj(h_herm)


def default_links(single_user: bool, overrides: dict[str, dict[str, float]] | None = None) -> dict[LinkName, LinkParams]:
    """
    Link parameters of a scenario family with the IRS element gain applied
    once on each IRS-terminated link.
    """
    table = get_link_defaults(single_user)
    for name, values in (overrides or {}).items():
        table[name].update(values)

    gains = {
        LinkName.AP_IRS: IRS_ELEMENT_GAIN_DBI,
        LinkName.IRS_USER: IRS_ELEMENT_GAIN_DBI,
        LinkName.AP_USER: AP_ANTENNA_GAIN_DBI,
    }
    links = {}
    for link in LinkName:
        values = {"reference_loss_db": REFERENCE_LOSS_DB, "antenna_gain_dbi": gains[link]}
        values.update(table[link.value])
        links[link] = LinkParams(**values)
    return links


def layout_user_positions() -> list[tuple[float, float, float]]:
    """
    The eight multiuser positions: users 0-3 evenly on a half-circle of
    radius d_I around the IRS (in front of it, x > 0), users 4-7 evenly on a
    half-circle of radius d_A around the AP (towards the IRS, y > 0).
    Angles sit at the centres of four equal sectors of (0, pi).
    """
    angles = (np.arange(4) + 0.5) * math.pi / 4
    near = [
        (IRS_USER_RADIUS_M * math.sin(a), IRS_Y_M + IRS_USER_RADIUS_M * math.cos(a), 0.0)
        for a in angles
    ]
    far = [
        (AP_X_M + AP_USER_RADIUS_M * math.cos(a), AP_USER_RADIUS_M * math.sin(a), 0.0)
        for a in angles
    ]
    return near + far


def single_user_geometry(m_antennas: int, n_elements: int, distance: float) -> Geometry:
    """One user at (d_x, d, 0) on the line parallel to the y-axis."""
    n_y, n_z = irs_grid(n_elements)
    return Geometry(
        m_antennas=m_antennas,
        n_elements=n_elements,
        n_y=n_y,
        n_z=n_z,
        ap_ref_position=(AP_X_M, 0.0, 0.0),
        irs_ref_position=(0.0, IRS_Y_M, 0.0),
        user_positions=((AP_X_M, distance, 0.0),),
        element_spacing=ELEMENT_SPACING_WAVELENGTHS,
    )


def multiuser_geometry(m_antennas: int, n_elements: int, users: list[int]) -> Geometry:
    """The multiuser layout restricted to the listed user indices (0-based)."""
    positions = layout_user_positions()
    n_y, n_z = irs_grid(n_elements)
    return Geometry(
        m_antennas=m_antennas,
        n_elements=n_elements,
        n_y=n_y,
        n_z=n_z,
        ap_ref_position=(AP_X_M, 0.0, 0.0),
        irs_ref_position=(0.0, IRS_Y_M, 0.0),
        user_positions=tuple(positions[u] for u in users),
        element_spacing=ELEMENT_SPACING_WAVELENGTHS,
    )
