"""Dipole radiation, mutual coupling, and array field synthesis.

Transmit elements are center-fed thin-wire dipoles with a sinusoidal current
profile. Radiated fields use the closed-form far-zone expression; coupling
between parallel elements uses the induced-EMF integral evaluated by adaptive
quadrature. Phase convention: exp(-jkd) outgoing with an implicit exp(+jwt)
time factor.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import quad

from .errors import (
    ConditioningError,
    GeometryError,
    NonRadiatingError,
    PolarizationError,
    SingularityError,
)
from .geometry import Vec3, _as_vec3

SPEED_OF_LIGHT = 299_792_458.0  # m/s
FREE_SPACE_IMPEDANCE = 376.730313668  # ohms

# Below this sine-of-axis-angle the field gain is second order in the angle
# and the polarization direction is undefined; treat as an exact axial null.
AXIAL_SIN_EPS = 1e-6

# Coupling integrals are resolved to this absolute accuracy in ohms.
IMPEDANCE_ABS_TOL = 1e-3

_COND_LIMIT = 1e12


@dataclass(frozen=True)
class EmConstants:
    """Carrier-derived constants: wavelength, wavenumber, wave impedance."""

    frequency: float  # Hz
    wavelength: float  # m
    wavenumber: float  # rad/m
    eta: float = FREE_SPACE_IMPEDANCE  # ohms

    def __post_init__(self):
        if not self.frequency > 0:
            raise ValueError("frequency must be positive")
        if abs(self.wavelength - SPEED_OF_LIGHT / self.frequency) > 1e-6 * self.wavelength:
            raise ValueError("wavelength inconsistent with frequency")
        if abs(self.wavenumber - 2.0 * np.pi / self.wavelength) > 1e-6 * self.wavenumber:
            raise ValueError("wavenumber inconsistent with wavelength")

    @classmethod
    def from_frequency(cls, frequency: float, eta: float = FREE_SPACE_IMPEDANCE) -> "EmConstants":
        wavelength = SPEED_OF_LIGHT / frequency
        return cls(frequency=frequency, wavelength=wavelength,
                   wavenumber=2.0 * np.pi / wavelength, eta=eta)


@dataclass(frozen=True)
class DipoleSpec:
    """Thin-wire dipole: half-length, wire radius, and axis orientation."""

    half_length: float  # m
    wire_radius: float  # m
    orientation: Vec3  # unit vector along the wire

    def __post_init__(self):
        if not self.half_length > 0:
            raise ValueError("half_length must be positive")
        if not 0 < self.wire_radius < 0.1 * self.half_length:
            raise ValueError("wire_radius must satisfy 0 < radius << half_length")
        n = _as_vec3(self.orientation)
        norm = np.linalg.norm(n)
        if abs(norm - 1.0) > 1e-9:
            raise ValueError("orientation must be a unit vector")
        object.__setattr__(self, "orientation", n / norm)


@dataclass(frozen=True)
class PlacedDipole:
    """A dipole spec together with its feed-point position."""

    spec: DipoleSpec
    center: Vec3

    def __post_init__(self):
        object.__setattr__(self, "center", _as_vec3(self.center))


@dataclass(frozen=True)
class ImpedanceMatrix:
    """Mutual-coupling matrix of the array with its cached inverse.

    Symmetric without conjugation (reciprocity); diagonal entries carry a
    positive real part (radiation resistance).
    """

    entries: np.ndarray  # (N, N) complex, ohms
    inverse: np.ndarray = field(repr=False, default=None)
    condition_number: float = field(default=np.nan)

    def __post_init__(self):
        z = np.asarray(self.entries, dtype=complex)
        n = z.shape[0]
        if z.shape != (n, n):
            raise ValueError("entries must be square")
        if np.linalg.norm(z - z.T) > 1e-9 * max(np.linalg.norm(z), 1e-300):
            raise ValueError("coupling matrix must be symmetric (non-conjugate)")
        if np.any(np.real(np.diag(z)) <= 0):
            raise ValueError("diagonal entries must have positive real part")
        object.__setattr__(self, "entries", z)
        cond = float(np.linalg.cond(z))
        if not np.isfinite(cond) or cond > _COND_LIMIT:
            raise ConditioningError(f"coupling matrix is numerically singular (cond={cond:.3g})")
        object.__setattr__(self, "condition_number", cond)
        object.__setattr__(self, "inverse", np.linalg.inv(z))

    @property
    def n_elements(self) -> int:
        return self.entries.shape[0]


@dataclass(frozen=True)
class ArrayResponse:
    """Per-element propagation response at one observation point.

    ``gains`` holds g(psi) * exp(-jkd) / d per element (1/m); ``polarization``
    stacks the per-element unit polarization vectors as columns. Columns are
    zero for elements observed exactly along their axis (the gain is zero
    there as well).
    """

    gains: np.ndarray  # (N,) complex
    polarization: np.ndarray  # (3, N) complex


def normalized_gain(psi, k: float, h: float):
    """Normalized field gain of a sinusoidal-current dipole at axis angle psi.

    Returns (cos(kh cos psi) - cos(kh)) / sin(psi); the axial limit is zero
    because the numerator is second order in the angle.
    """
    psi = np.asarray(psi, dtype=float)
    if np.any(psi < -1e-12) or np.any(psi > np.pi + 1e-12):
        raise ValueError("psi must lie in [0, pi]")
    g = _gain_from_cos(np.cos(psi), k, h)
    return float(g) if g.ndim == 0 else g


def _gain_from_cos(cos_psi, k: float, h: float):
    cos_psi = np.asarray(cos_psi, dtype=float)
    sin_psi = np.sqrt(np.clip(1.0 - cos_psi * cos_psi, 0.0, 1.0))
    kh = k * h
    num = np.cos(kh * cos_psi) - np.cos(kh)
    safe = np.where(sin_psi <= AXIAL_SIN_EPS, 1.0, sin_psi)
    return np.where(sin_psi <= AXIAL_SIN_EPS, 0.0, num / safe)


def polarization_unit_vector(orientation: Vec3, r_hat: Vec3) -> Vec3:
    """Unit polarization vector [(n.r)r - n]/sin(psi): transverse, in the
    plane spanned by the dipole axis and the propagation direction."""
    n = _as_vec3(orientation)
    r = _as_vec3(r_hat)
    cos_psi = float(np.dot(n, r))
    sin_psi = np.sqrt(max(0.0, 1.0 - cos_psi * cos_psi))
    if sin_psi <= AXIAL_SIN_EPS:
        raise PolarizationError("polarization undefined along the dipole axis")
    return (cos_psi * r - n) / sin_psi


def _polarizations_from_dirs(orientation: np.ndarray, r_hat: np.ndarray,
                             cos_psi: np.ndarray, sin_psi: np.ndarray) -> np.ndarray:
    # r_hat (..., 3); zero vector where the direction is axial
    rho = cos_psi[..., None] * r_hat - orientation
    safe = np.where(sin_psi <= AXIAL_SIN_EPS, 1.0, sin_psi)
    rho = rho / safe[..., None]
    rho[sin_psi <= AXIAL_SIN_EPS] = 0.0
    return rho


def single_dipole_field(spec: DipoleSpec, feed_position, port_current: complex,
                        observation, consts: EmConstants) -> np.ndarray:
    """Far-zone electric field of one dipole at an observation point, V/m.

    The drive is the port current at the feed; the radiating amplitude is the
    current-profile maximum port_current / sin(kh).
    """
    feed = _as_vec3(feed_position)
    obs = _as_vec3(observation)
    diff = obs - feed
    d = float(np.linalg.norm(diff))
    if d <= max(spec.wire_radius, 1e-12):
        raise SingularityError("observation point coincides with the dipole")
    r_hat = diff / d
    n = spec.orientation
    cos_psi = float(np.dot(n, r_hat))
    sin_psi = np.sqrt(max(0.0, 1.0 - cos_psi * cos_psi))
    k, h = consts.wavenumber, spec.half_length
    g = float(_gain_from_cos(np.array(cos_psi), k, h))
    if sin_psi <= AXIAL_SIN_EPS or g == 0.0:
        return np.zeros(3, dtype=complex)
    rho = (cos_psi * r_hat - n) / sin_psi
    i_max = port_current / np.sin(k * h)
    amp = 1j * consts.eta * i_max / (2.0 * np.pi * d) * g * np.exp(-1j * k * d)
    return amp * rho


def _coupling_kernel(l, rho2: float, d_par: float, k: float, h_p: float, h_q: float):
    """Induced-EMF integrand: endpoint/center spherical waves weighted by the
    sampling dipole's current profile."""
    l = np.asarray(l, dtype=float)
    r0 = np.sqrt(rho2 + (d_par + l) ** 2)
    r1 = np.sqrt(rho2 + (d_par + l - h_q) ** 2)
    r2 = np.sqrt(rho2 + (d_par + l + h_q) ** 2)
    waves = (np.exp(-1j * k * r1) / r1 + np.exp(-1j * k * r2) / r2
             - 2.0 * np.cos(k * h_q) * np.exp(-1j * k * r0) / r0)
    return waves * np.sin(k * (h_p - np.abs(l)))


def mutual_impedance(p: PlacedDipole, q: PlacedDipole, consts: EmConstants,
                     abs_tol: float = IMPEDANCE_ABS_TOL) -> complex:
    """Mutual impedance between two parallel dipoles (induced-EMF method), ohms.

    Coincident feed points mean self-impedance: the transverse separation is
    then the wire radius (field evaluated on the wire surface). The axial
    separation is canonicalized to its absolute value, a proven symmetry of
    the integral, so swapping the arguments returns the identical value.
    """
    n_p, n_q = p.spec.orientation, q.spec.orientation
    if np.linalg.norm(np.cross(n_p, n_q)) > 1e-9:
        raise GeometryError("mutual impedance requires parallel dipole axes")
    n = n_p
    d = p.center - q.center
    sep = float(np.linalg.norm(d))
    d_par = abs(float(np.dot(d, n)))
    rho2 = max(0.0, sep * sep - d_par * d_par)
    h_p, h_q = p.spec.half_length, q.spec.half_length
    if sep <= 1e-12:
        # self-impedance: evaluate on the wire surface
        rho2 = p.spec.wire_radius ** 2
        d_par = 0.0
    else:
        min_rad = 2.0 * max(p.spec.wire_radius, q.spec.wire_radius)
        if np.sqrt(rho2) < min_rad and d_par < h_p + h_q:
            raise GeometryError("distinct dipoles overlap (separation below wire diameter)")

    k = consts.wavenumber
    pref = 1j * consts.eta / (4.0 * np.pi * np.sin(k * h_p) * np.sin(k * h_q))
    eps = abs_tol / abs(pref)

    def f_re(l):
        return _coupling_kernel(l, rho2, d_par, k, h_p, h_q).real

    def f_im(l):
        return _coupling_kernel(l, rho2, d_par, k, h_p, h_q).imag

    re, _ = quad(f_re, -h_p, h_p, points=[0.0], limit=400, epsabs=eps, epsrel=1e-10)
    im, _ = quad(f_im, -h_p, h_p, points=[0.0], limit=400, epsabs=eps, epsrel=1e-10)
    return complex(pref * (re + 1j * im))


def impedance_matrix(placed: list[PlacedDipole], consts: EmConstants,
                     abs_tol: float = IMPEDANCE_ABS_TOL) -> ImpedanceMatrix:
    """Full coupling matrix of a parallel array; entries from the induced-EMF
    integral, symmetric by construction."""
    n = len(placed)
    if n < 1:
        raise ValueError("need at least one element")
    z = np.zeros((n, n), dtype=complex)
    for i in range(n):
        for j in range(i, n):
            z[i, j] = mutual_impedance(placed[i], placed[j], consts, abs_tol)
            z[j, i] = z[i, j]
    return ImpedanceMatrix(entries=z)


def propagation_response(positions: np.ndarray, spec: DipoleSpec,
                         observations: np.ndarray, consts: EmConstants):
    """Vectorized distances, gains, and polarizations from every element to
    every observation point.

    Returns (gains, polarization) with shapes (K, N) and (K, N, 3) for K
    observation points and N elements.
    """
    obs = np.atleast_2d(np.asarray(observations, dtype=float))
    pos = np.asarray(positions, dtype=float)
    diff = obs[:, None, :] - pos[None, :, :]
    dist = np.linalg.norm(diff, axis=-1)
    if dist.min() <= max(spec.wire_radius, 1e-12):
        raise SingularityError("observation point coincides with an array element")
    r_hat = diff / dist[..., None]
    n = spec.orientation
    cos_psi = r_hat @ n
    sin_psi = np.sqrt(np.clip(1.0 - cos_psi * cos_psi, 0.0, 1.0))
    k, h = consts.wavenumber, spec.half_length
    g = _gain_from_cos(cos_psi, k, h)
    gains = g * np.exp(-1j * k * dist) / dist
    rho = _polarizations_from_dirs(n, r_hat, cos_psi, sin_psi)
    return gains, rho


def array_response(tx_positions: np.ndarray, spec: DipoleSpec,
                   observation, consts: EmConstants) -> ArrayResponse:
    """Per-element response at a single observation point: exact spherical
    wavefront (per-element distances) and per-element polarization."""
    gains, rho = propagation_response(tx_positions, spec,
                                      _as_vec3(observation)[None, :], consts)
    return ArrayResponse(gains=gains[0].astype(complex),
                         polarization=rho[0].T.astype(complex))


def transmit_power(w: np.ndarray, z: ImpedanceMatrix, v0: float) -> float:
    """Average radiated power (v0^2/2) Re(w^H Z^-1 w), watts."""
    w = np.asarray(w, dtype=complex)
    return float(0.5 * v0 * v0 * np.real(np.vdot(w, z.inverse @ w)))


def power_normalization(z: ImpedanceMatrix) -> float:
    """Drive normalization making ||w||^2 an upper bound on radiated power.

    v0 = sqrt(2 / lambda_max(Re(Z^-1))); the bound is tight along the top
    eigenvector of the real part of the admittance.
    """
    s = np.real(z.inverse)
    s = 0.5 * (s + s.T)
    lam = float(np.linalg.eigvalsh(s)[-1])
    if lam <= 0:
        raise NonRadiatingError("Re(Z^-1) has no positive eigenvalue")
    return float(np.sqrt(2.0 / lam))


def array_field(resp: ArrayResponse, z: ImpedanceMatrix, drive_voltages: np.ndarray,
                consts: EmConstants) -> np.ndarray:
    """Total field at the response's observation point for a drive-voltage
    vector; linear in the drive."""
    v = np.asarray(drive_voltages, dtype=complex)
    amps = (1j * consts.eta / (2.0 * np.pi)) * (resp.gains * (z.inverse @ v))
    return resp.polarization @ amps


@dataclass(frozen=True)
class TransmitArrayState:
    """Per-slot electromagnetic state of the transmit array.

    The coupling matrix depends only on the rigid internal layout, so it is
    computed once per run; positions and orientation follow the pose.
    """

    consts: EmConstants
    spec: DipoleSpec
    positions: np.ndarray  # (N, 3)
    impedance: ImpedanceMatrix
    v0: float

    @property
    def n_elements(self) -> int:
        return self.positions.shape[0]
