import numpy as np
import pytest

from thermbeam.em import (
    DipoleSpec,
    EmConstants,
    PlacedDipole,
    TransmitArrayState,
    impedance_matrix,
    power_normalization,
)
from thermbeam.geometry import UePose, orientation_vector, tx_element_positions


@pytest.fixture(scope="session")
def consts() -> EmConstants:
    return EmConstants.from_frequency(30e9)


@pytest.fixture(scope="session")
def half_wave(consts) -> DipoleSpec:
    lam = consts.wavelength
    return DipoleSpec(half_length=lam / 4.0, wire_radius=lam / 1000.0,
                      orientation=np.array([0.0, 0.0, 1.0]))


def state_for_pose(consts: EmConstants, pose: UePose, v0: float | None = None) -> TransmitArrayState:
    """Transmit-array state for a pose, with half-wave elements."""
    lam = consts.wavelength
    spec = DipoleSpec(half_length=lam / 4.0, wire_radius=lam / 1000.0,
                      orientation=orientation_vector(pose))
    positions = tx_element_positions(pose)
    placed = [PlacedDipole(spec=spec, center=p) for p in positions]
    z = impedance_matrix(placed, consts)
    return TransmitArrayState(consts=consts, spec=spec, positions=positions,
                              impedance=z, v0=power_normalization(z) if v0 is None else v0)
