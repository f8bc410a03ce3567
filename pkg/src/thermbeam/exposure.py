"""Near-field exposure: drive weights to incident power density on the head.

Unlike the uplink channel, exposure points sit within tens of wavelengths of
the array, so the manifold keeps exact per-element spherical spreading and
per-element polarization (no parallel-ray shortcut).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .em import TransmitArrayState, propagation_response
from .geometry import HeadModel


@dataclass(frozen=True)
class ExposureManifold:
    """Per-sampling-point field maps: matrices[m] sends a drive vector to the
    complex field vector at point m (V/m per unit drive weight)."""

    matrices: np.ndarray  # (M, 3, N_t) complex
    eta: float  # ohms, wave impedance used for the power-density quadratic form
    slot_index: int = -1

    def __post_init__(self):
        m = np.asarray(self.matrices, dtype=complex)
        if m.ndim != 3 or m.shape[1] != 3:
            raise ValueError("matrices must have shape (M, 3, N_t)")
        if not np.all(np.isfinite(m)):
            raise ValueError("manifold entries must be finite")
        object.__setattr__(self, "matrices", m)

    @property
    def n_points(self) -> int:
        return self.matrices.shape[0]


def exposure_manifold(head: HeadModel, state: TransmitArrayState,
                      slot_index: int = -1) -> ExposureManifold:
    """Field map from drive weights to the field at every head sampling point."""
    gains, rho = propagation_response(state.positions, state.spec,
                                      head.sampling_points, state.consts)
    coef = 1j * state.consts.eta * state.v0 / (2.0 * np.pi)
    weighted = rho * gains[..., None]  # (M, N_t, 3)
    phi = coef * np.einsum("mtc,tn->mcn", weighted, state.impedance.inverse)
    return ExposureManifold(matrices=phi, eta=state.consts.eta, slot_index=slot_index)


def incident_pd(manifold: ExposureManifold, w: np.ndarray, eta: float | None = None) -> np.ndarray:
    """Incident power density |E|^2 / (2 eta) at every sampling point, W/m^2."""
    eta = manifold.eta if eta is None else eta
    fields = manifold.matrices @ np.asarray(w, dtype=complex)
    return np.sum(np.abs(fields) ** 2, axis=1) / (2.0 * eta)
