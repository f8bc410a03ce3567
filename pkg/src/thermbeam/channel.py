"""Equivalent uplink channel: drive weights to induced receive voltages.

Each channel row maps the transmit drive vector to the open-circuit voltage
of one receive element through the radiated field, including coupling,
per-element spherical spreading, and polarization mismatch.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .em import AXIAL_SIN_EPS, TransmitArrayState, polarization_unit_vector, propagation_response
from .geometry import BsGeometry, Vec3, _as_vec3, rx_element_positions


@dataclass(frozen=True)
class ReceiverSpec:
    """Receive-side conversion: antenna polarization and field-to-voltage factor."""

    polarization: Vec3
    antenna_factor: float = 1.0

    def __post_init__(self):
        p = _as_vec3(self.polarization)
        norm = np.linalg.norm(p)
        if abs(norm - 1.0) > 1e-9:
            raise ValueError("receiver polarization must be a unit vector")
        object.__setattr__(self, "polarization", p / norm)


@dataclass(frozen=True)
class ChannelMatrix:
    """Stacked channel rows, one per receive element; volts per unit drive weight."""

    entries: np.ndarray  # (N_r, N_t) complex
    slot_index: int = -1

    def __post_init__(self):
        e = np.asarray(self.entries, dtype=complex)
        if e.ndim != 2:
            raise ValueError("entries must be a 2-D matrix")
        if not np.all(np.isfinite(e)):
            raise ValueError("channel entries must be finite")
        object.__setattr__(self, "entries", e)


def _entries(h) -> np.ndarray:
    return h.entries if isinstance(h, ChannelMatrix) else np.asarray(h, dtype=complex)


def polarization_mismatch(rx: ReceiverSpec, pol_matrix: np.ndarray,
                          far_field_direction=None, orientation=None) -> np.ndarray:
    """Per-element polarization projection |rho_r . rho_t|, each in [0, 1].

    With ``far_field_direction`` given (direction from the array center to the
    receiver) all entries collapse to the common parallel-ray value computed
    from that direction and the element ``orientation``.
    """
    pol = np.asarray(pol_matrix)
    if far_field_direction is not None:
        if orientation is None:
            raise ValueError("far-field mismatch needs the element orientation")
        rho = polarization_unit_vector(orientation, _as_vec3(far_field_direction))
        common = abs(float(np.dot(rx.polarization, rho)))
        return np.full(pol.shape[1], common)
    return np.abs(rx.polarization @ pol)


def channel_vector(rx_position, rx: ReceiverSpec, state: TransmitArrayState,
                   far_field: bool = True) -> np.ndarray:
    """Channel row for a single receive element at ``rx_position``."""
    rx_position = _as_vec3(rx_position)
    gains, rho = propagation_response(state.positions, state.spec,
                                      rx_position[None, :], state.consts)
    if far_field:
        center = state.positions.mean(axis=0)
        diff = rx_position - center
        direction = diff / np.linalg.norm(diff)
        mu = polarization_mismatch(rx, rho[0].T, far_field_direction=direction,
                                   orientation=state.spec.orientation)
    else:
        mu = polarization_mismatch(rx, rho[0].T)
    coef = 1j * state.consts.eta * rx.antenna_factor * state.v0 / (2.0 * np.pi)
    return coef * ((mu * gains[0]) @ state.impedance.inverse)


def channel_matrix(bs: BsGeometry, rx: ReceiverSpec, state: TransmitArrayState,
                   far_field: bool = True, slot_index: int = -1) -> ChannelMatrix:
    """Full channel matrix: one row per receive element."""
    rx_pos = rx_element_positions(bs)
    gains, rho = propagation_response(state.positions, state.spec, rx_pos, state.consts)
    if far_field:
        center = state.positions.mean(axis=0)
        diff = rx_pos - center
        dirs = diff / np.linalg.norm(diff, axis=1, keepdims=True)
        n = state.spec.orientation
        cos_psi = dirs @ n
        sin_psi = np.sqrt(np.clip(1.0 - cos_psi * cos_psi, 0.0, 1.0))
        safe = np.where(sin_psi <= AXIAL_SIN_EPS, 1.0, sin_psi)
        rho_far = (cos_psi[:, None] * dirs - n) / safe[:, None]
        rho_far[sin_psi <= AXIAL_SIN_EPS] = 0.0
        mu = np.abs(rho_far @ rx.polarization)[:, None]
    else:
        mu = np.abs(np.einsum("c,ktc->kt", rx.polarization + 0j, rho))
    coef = 1j * state.consts.eta * rx.antenna_factor * state.v0 / (2.0 * np.pi)
    h = coef * ((mu * gains) @ state.impedance.inverse)
    return ChannelMatrix(entries=h, slot_index=slot_index)


def received_snr(h, w: np.ndarray, noise_variance: float) -> tuple[float, float]:
    """Matched-filter SNR over all receive branches for a unit data symbol.

    Returns (linear, dB); a zero drive yields (0, -inf).
    """
    if not noise_variance > 0:
        raise ValueError("noise_variance must be positive")
    y = _entries(h) @ np.asarray(w, dtype=complex)
    snr = float(np.real(np.vdot(y, y))) / noise_variance
    snr_db = 10.0 * np.log10(snr) if snr > 0 else float("-inf")
    return snr, snr_db
