"""Cartesian geometry of the transmit array, receive array, and head sampling points.

All lengths are meters, all angles radians. Positions are float64 numpy
arrays of shape (3,); the z-axis is vertical.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

Vec3 = np.ndarray  # shape (3,), float64


def vec3(x: float, y: float, z: float) -> Vec3:
    """Build a finite position vector."""
    v = np.array([x, y, z], dtype=float)
    if not np.all(np.isfinite(v)):
        raise ValueError(f"non-finite position components: {v}")
    return v


def _as_vec3(v) -> Vec3:
    a = np.asarray(v, dtype=float)
    if a.shape != (3,):
        raise ValueError(f"expected a 3-vector, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError(f"non-finite position components: {a}")
    return a


@dataclass(frozen=True)
class UePose:
    """Handset array pose: center position, orientation angles, element layout.

    ``tilt_angle`` rotates the element axis within the horizontal plane;
    ``polar_angle`` is measured from the vertical axis to the orientation
    vector of the elements. The element axis is always horizontal and
    orthogonal to the orientation vector.
    """

    center: Vec3
    tilt_angle: float
    polar_angle: float
    n_elements: int
    spacing: float

    def __post_init__(self):
        object.__setattr__(self, "center", _as_vec3(self.center))
        if self.n_elements < 1:
            raise ValueError("n_elements must be >= 1")
        if not self.spacing > 0:
            raise ValueError("spacing must be positive")
        if not (np.isfinite(self.tilt_angle) and np.isfinite(self.polar_angle)):
            raise ValueError("pose angles must be finite")


@dataclass(frozen=True)
class BsGeometry:
    """Receive array: elements along the x-axis at a fixed height above the origin."""

    height: float
    n_elements: int
    spacing: float

    def __post_init__(self):
        if self.n_elements < 1:
            raise ValueError("n_elements must be >= 1")
        if not self.spacing > 0:
            raise ValueError("spacing must be positive")


@dataclass(frozen=True)
class HeadModel:
    """Spherical head with surface sampling points.

    Every sampling point must lie on the sphere (within 1e-9 m) and the
    points must be pairwise distinct.
    """

    center: Vec3
    radius: float
    sampling_points: np.ndarray  # (M, 3)

    def __post_init__(self):
        object.__setattr__(self, "center", _as_vec3(self.center))
        pts = np.asarray(self.sampling_points, dtype=float)
        if pts.ndim != 2 or pts.shape[1] != 3 or pts.shape[0] < 1:
            raise ValueError("sampling_points must have shape (M, 3) with M >= 1")
        object.__setattr__(self, "sampling_points", pts)
        if not self.radius > 0:
            raise ValueError("radius must be positive")
        r = np.linalg.norm(pts - self.center, axis=1)
        if np.max(np.abs(r - self.radius)) > 1e-9:
            raise ValueError("sampling points must lie on the sphere surface")
        if pts.shape[0] > 1:
            d = np.linalg.norm(pts[:, None, :] - pts[None, :, :], axis=-1)
            d[np.diag_indices_from(d)] = np.inf
            if d.min() <= 1e-12:
                raise ValueError("sampling points must be pairwise distinct")

    @property
    def n_sampling_points(self) -> int:
        return self.sampling_points.shape[0]


def orientation_vector(pose: UePose) -> Vec3:
    """Unit orientation vector of the handset elements for the given pose."""
    a, b = pose.tilt_angle, pose.polar_angle
    return np.array([np.sin(b) * np.sin(a), np.sin(b) * np.cos(a), np.cos(b)])


def _centered_offsets(n: int) -> np.ndarray:
    # (n+1-2t)/2 for t = 1..n: symmetric half-integer offsets about the center
    return (n + 1 - 2 * np.arange(1, n + 1)) / 2.0


def tx_element_positions(pose: UePose) -> np.ndarray:
    """Element positions of the handset array, shape (n_elements, 3).

    The element axis is horizontal: offsets are applied along
    (cos tilt, -sin tilt, 0) so the mean of the positions is the center.
    """
    delta = _centered_offsets(pose.n_elements)
    out = np.empty((pose.n_elements, 3))
    out[:, 0] = pose.center[0] + delta * pose.spacing * np.cos(pose.tilt_angle)
    out[:, 1] = pose.center[1] - delta * pose.spacing * np.sin(pose.tilt_angle)
    out[:, 2] = pose.center[2]
    return out


def rx_element_positions(bs: BsGeometry) -> np.ndarray:
    """Element positions of the receive array, shape (n_elements, 3)."""
    delta = _centered_offsets(bs.n_elements)
    out = np.zeros((bs.n_elements, 3))
    out[:, 0] = delta * bs.spacing
    out[:, 2] = bs.height
    return out


def pairwise_distance(a: Vec3, b: Vec3) -> float:
    """Euclidean distance between two points."""
    return float(np.linalg.norm(_as_vec3(a) - _as_vec3(b)))


def head_sampling_points(center, radius: float, n_points: int) -> HeadModel:
    """Head model with points equally spaced in azimuth on the horizontal
    great circle at the center height.

    Azimuth zero is the +x direction; the choice only relabels points.
    """
    if n_points < 1:
        raise ValueError("n_points must be >= 1")
    if not radius > 0:
        raise ValueError("radius must be positive")
    center = _as_vec3(center)
    phi = 2.0 * np.pi * np.arange(n_points) / n_points
    pts = np.stack(
        [
            center[0] + radius * np.cos(phi),
            center[1] + radius * np.sin(phi),
            np.full(n_points, center[2]),
        ],
        axis=1,
    )
    return HeadModel(center=center, radius=radius, sampling_points=pts)
