"""Skin-surface thermal response to incident power density.

The surface temperature rise follows a perfusion-damped diffusion response;
its closed-form step response is erf(sqrt(t/tau)) scaled by a tissue
prefactor, discretized into precomputed per-slot deposit coefficients. The
ground-truth state is the full (truncated) convolution; a one-pole recursion
is provided separately as an explicitly labeled approximation.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.special import erf as _erf
from scipy.special import erfinv as _erfinv


def erf(x):
    """Error function (double precision, odd, -> +-1 at +-infinity)."""
    out = _erf(x)
    return float(out) if np.ndim(x) == 0 else out


@dataclass(frozen=True)
class TissueParams:
    """Thermal properties of skin tissue, SI units.

    ``blood_perfusion`` is volumetric perfusion in m^3/(s kg); use
    :func:`perfusion_si` to convert the conventional ml/(min kg) figure.
    ``transmission_coeff`` is the fraction of incident power entering the skin.
    """

    thermal_conductivity: float  # W/(m C)
    density: float  # kg/m^3
    specific_heat: float  # J/(kg C)
    blood_perfusion: float  # m^3/(s kg)
    transmission_coeff: float  # dimensionless, (0, 1]

    def __post_init__(self):
        for name in ("thermal_conductivity", "density", "specific_heat", "blood_perfusion"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if not 0 < self.transmission_coeff <= 1:
            raise ValueError("transmission_coeff must lie in (0, 1]")

    @classmethod
    def skin_defaults(cls, transmission_coeff: float = 0.8) -> "TissueParams":
        """Standard skin values: k=0.37 W/(m C), rho=1109 kg/m^3,
        c_p=3390 J/(kg C), perfusion 106 ml/(min kg)."""
        return cls(
            thermal_conductivity=0.37,
            density=1109.0,
            specific_heat=3390.0,
            blood_perfusion=perfusion_si(106.0),
            transmission_coeff=transmission_coeff,
        )


def perfusion_si(ml_per_min_kg: float) -> float:
    """Convert blood perfusion from ml/(min kg) to m^3/(s kg)."""
    return ml_per_min_kg * 1e-6 / 60.0


def characteristic_scales(p: TissueParams) -> tuple[float, float]:
    """Perfusion time constant tau = 1/(w_b rho), seconds, and the
    perfusion-dominated length scale sqrt(k / (rho^2 c_p w_b)), meters."""
    tau = 1.0 / (p.blood_perfusion * p.density)
    r_th = float(np.sqrt(p.thermal_conductivity /
                         (p.density ** 2 * p.specific_heat * p.blood_perfusion)))
    return tau, r_th


@dataclass(frozen=True)
class ThermalKernel:
    """Discretized surface-heating kernel.

    ``xi[i]`` is the fractional temperature deposit of power applied i slots
    ago; partial sums telescope to erf(sqrt(n dt / tau)). The series is
    truncated once the omitted tail mass drops below the tolerance used to
    build it.
    """

    tau: float  # s
    r_th: float  # m
    prefactor: float  # C per (W/m^2), steady-state gain T_tr * R_th / k
    dt: float  # s
    xi: np.ndarray = field(repr=False)
    truncation_index: int

    def __post_init__(self):
        xi = np.asarray(self.xi, dtype=float)
        if xi.ndim != 1 or xi.shape[0] != self.truncation_index:
            raise ValueError("xi length must equal truncation_index")
        if np.any(xi <= 0) or np.any(np.diff(xi) >= 0):
            raise ValueError("xi must be positive and strictly decreasing")
        object.__setattr__(self, "xi", xi)

    @property
    def decay(self) -> float:
        """Per-slot retention factor exp(-dt/tau)."""
        return float(np.exp(-self.dt / self.tau))

    @property
    def tail_mass(self) -> float:
        """Kernel mass beyond the truncation window (fraction of 1)."""
        return 1.0 - erf(np.sqrt(self.truncation_index * self.dt / self.tau))


def kernel_coefficients(p: TissueParams, dt: float, eps_xi: float = 1e-4) -> ThermalKernel:
    """Precompute the per-slot deposit coefficients for slot duration ``dt``.

    The window length is the smallest n whose omitted tail
    1 - erf(sqrt(n dt / tau)) falls below ``eps_xi``.
    """
    if not dt > 0:
        raise ValueError("dt must be positive")
    if not 0 < eps_xi < 1:
        raise ValueError("eps_xi must lie in (0, 1)")
    tau, r_th = characteristic_scales(p)
    prefactor = p.transmission_coeff * r_th / p.thermal_conductivity
    n_trunc = int(np.ceil(tau * _erfinv(1.0 - eps_xi) ** 2 / dt))
    n_trunc = max(n_trunc, 1)
    edges = _erf(np.sqrt(np.arange(n_trunc + 1) * dt / tau))
    xi = np.diff(edges)
    return ThermalKernel(tau=tau, r_th=r_th, prefactor=prefactor, dt=dt,
                         xi=xi, truncation_index=n_trunc)


def impulse_response(kernel: ThermalKernel, t) -> float | np.ndarray:
    """Surface temperature response to a unit power-density impulse, C per
    (W/m^2 s); defined for t > 0 only."""
    t = np.asarray(t, dtype=float)
    if np.any(t <= 0):
        raise ValueError("impulse response is defined for t > 0")
    out = kernel.prefactor * np.exp(-t / kernel.tau) / np.sqrt(np.pi * kernel.tau * t)
    return float(out) if out.ndim == 0 else out


def step_response(kernel: ThermalKernel, t) -> float | np.ndarray:
    """Temperature per unit constant power density after time t, C per (W/m^2)."""
    t = np.asarray(t, dtype=float)
    if np.any(t < 0):
        raise ValueError("step response is defined for t >= 0")
    out = kernel.prefactor * _erf(np.sqrt(t / kernel.tau))
    return float(out) if out.ndim == 0 else out


class ThermalState:
    """Per-point temperature state with a ring buffer of past power densities.

    One instance serves one sequential run; points within a slot update
    together. The buffer length equals the kernel truncation window.
    """

    def __init__(self, n_points: int, kernel: ThermalKernel):
        if n_points < 1:
            raise ValueError("n_points must be >= 1")
        self.temps = np.zeros(n_points)
        self._buf = np.zeros((kernel.truncation_index, n_points))
        self._count = 0

    @property
    def n_points(self) -> int:
        return self.temps.shape[0]

    @property
    def slots_seen(self) -> int:
        return self._count


def temperature_step(state: ThermalState, kernel: ThermalKernel, pd) -> np.ndarray:
    """Advance one slot with per-point incident power density, W/m^2.

    Temperatures are the deposit-weighted convolution of the stored history:
    T[n] = prefactor * sum_i xi[i] * pd[n - i] over the truncation window.
    """
    pd = np.asarray(pd, dtype=float)
    if pd.shape != state.temps.shape:
        raise ValueError("pd must have one entry per sampling point")
    if np.any(pd < 0):
        raise ValueError("power density must be non-negative")
    cap = kernel.truncation_index
    pos = state._count % cap
    state._buf[pos] = pd
    state._count += 1
    n_used = min(state._count, cap)
    if state._count <= cap:
        window = state._buf[pos::-1]  # newest first, no wrap yet
        temps = kernel.xi[:n_used] @ window
    else:
        temps = kernel.xi[: pos + 1] @ state._buf[pos::-1]
        temps += kernel.xi[pos + 1:] @ state._buf[: pos : -1]
    state.temps = kernel.prefactor * temps
    return state.temps.copy()


def markov_temperature_step(state: ThermalState, kernel: ThermalKernel, pd) -> np.ndarray:
    """One-pole approximation: T[n] = exp(-dt/tau) T[n-1] + prefactor xi[0] pd[n].

    Kept for comparison only; its geometric tail substantially overestimates
    accumulation when dt << tau, so it is not used as the ground-truth state.
    """
    pd = np.asarray(pd, dtype=float)
    if pd.shape != state.temps.shape:
        raise ValueError("pd must have one entry per sampling point")
    if np.any(pd < 0):
        raise ValueError("power density must be non-negative")
    state._count += 1
    state.temps = kernel.decay * state.temps + kernel.prefactor * kernel.xi[0] * pd
    return state.temps.copy()
