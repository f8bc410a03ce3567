"""Built-in validation suite: cross-checks the model against independent
references and known physical constants.

Run via ``thermbeam validate``; each check reports its measured error and
passes only below the stated limit. ``strict`` halves every limit.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .control import dominant_eigenpair
from .em import (
    DipoleSpec,
    EmConstants,
    PlacedDipole,
    impedance_matrix,
    mutual_impedance,
    single_dipole_field,
)
from .reference import impedance_fixed_quadrature, segment_dipole_field
from .thermal import ThermalState, TissueParams, characteristic_scales, kernel_coefficients, step_response, temperature_step

# classic induced-EMF values for thin half-wave dipoles
HALF_WAVE_SELF_RESISTANCE = 73.1  # ohms
HALF_WAVE_MUTUAL_HALF_SPACING = complex(-12.5, -29.9)  # ohms at lambda/2 spacing


@dataclass
class CheckResult:
    name: str
    measured: float
    limit: float
    passed: bool
    detail: str = ""

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        extra = f"  ({self.detail})" if self.detail else ""
        return f"[{status}] {self.name}: measured {self.measured:.6g}, limit {self.limit:.6g}{extra}"


def _half_wave(consts: EmConstants, orientation=(0.0, 0.0, 1.0)) -> DipoleSpec:
    lam = consts.wavelength
    return DipoleSpec(half_length=lam / 4.0, wire_radius=lam / 1000.0,
                      orientation=np.asarray(orientation, dtype=float))


def check_dipole_far_field(strict: bool = False) -> list[CheckResult]:
    """Closed-form far-zone field vs dense current-segment summation at 100
    wavelengths, 20 directions away from the axial nulls."""
    consts = EmConstants.from_frequency(30e9)
    spec = _half_wave(consts)
    feed = np.zeros(3)
    d = 100.0 * consts.wavelength
    psis = np.linspace(np.deg2rad(20.0), np.deg2rad(160.0), 20)
    phis = np.linspace(0.0, 2.0 * np.pi, 20, endpoint=False)
    mag_err = 0.0
    phase_err = 0.0
    for psi, phi in zip(psis, phis):
        direction = np.array([np.sin(psi) * np.cos(phi), np.sin(psi) * np.sin(phi), np.cos(psi)])
        obs = feed + d * direction
        e_model = single_dipole_field(spec, feed, 1.0, obs, consts)
        e_ref = segment_dipole_field(spec, feed, 1.0, obs, consts, n_segments=10_000)
        # compare along the model polarization axis
        pol = e_model / np.linalg.norm(e_model)
        s_model = complex(np.vdot(pol, e_model))
        s_ref = complex(np.vdot(pol, e_ref))
        mag_err = max(mag_err, abs(abs(s_ref) - abs(s_model)) / abs(s_ref))
        dphase = np.angle(s_model / s_ref)
        phase_err = max(phase_err, abs(np.rad2deg(dphase)))
    f = 0.5 if strict else 1.0
    return [
        CheckResult("dipole far-field magnitude vs segment sum (rel)", mag_err, 0.005 * f,
                    mag_err <= 0.005 * f, "20 directions at 100 wavelengths"),
        CheckResult("dipole far-field phase vs segment sum (deg)", phase_err, 1.0 * f,
                    phase_err <= 1.0 * f),
    ]


def check_impedance(strict: bool = False) -> list[CheckResult]:
    """Self and mutual impedance vs the classic thin-wire values and a
    10x-node fixed quadrature."""
    consts = EmConstants.from_frequency(30e9)
    lam = consts.wavelength
    spec = _half_wave(consts)
    a = PlacedDipole(spec=spec, center=np.zeros(3))
    b = PlacedDipole(spec=spec, center=np.array([lam / 2.0, 0.0, 0.0]))

    z_self = mutual_impedance(a, a, consts)
    z_mut = mutual_impedance(a, b, consts)
    z_self_ref = impedance_fixed_quadrature(a, a, consts, n_nodes=8192)
    z_mut_ref = impedance_fixed_quadrature(a, b, consts, n_nodes=8192)

    f = 0.5 if strict else 1.0
    res = [
        CheckResult("half-wave self-resistance vs 73.1 ohm (abs)",
                    abs(z_self.real - HALF_WAVE_SELF_RESISTANCE), 0.5 * f,
                    abs(z_self.real - HALF_WAVE_SELF_RESISTANCE) <= 0.5 * f,
                    f"measured {z_self.real:.3f} ohm"),
        CheckResult("self-impedance vs fixed-node oracle (ohm)",
                    abs(z_self - z_self_ref), 2e-3 * f,
                    abs(z_self - z_self_ref) <= 2e-3 * f),
        CheckResult("mutual impedance real part vs -12.5 ohm (abs)",
                    abs(z_mut.real - HALF_WAVE_MUTUAL_HALF_SPACING.real), 0.5 * f,
                    abs(z_mut.real - HALF_WAVE_MUTUAL_HALF_SPACING.real) <= 0.5 * f,
                    f"measured {z_mut.real:.3f} ohm"),
        CheckResult("mutual impedance imag part vs -29.9 ohm (abs)",
                    abs(z_mut.imag - HALF_WAVE_MUTUAL_HALF_SPACING.imag), 0.5 * f,
                    abs(z_mut.imag - HALF_WAVE_MUTUAL_HALF_SPACING.imag) <= 0.5 * f,
                    f"measured {z_mut.imag:.3f} ohm"),
        CheckResult("mutual impedance vs fixed-node oracle (ohm)",
                    abs(z_mut - z_mut_ref), 2e-3 * f,
                    abs(z_mut - z_mut_ref) <= 2e-3 * f),
    ]
    z = impedance_matrix([a, b], consts)
    sym = float(np.abs(z.entries[0, 1] - z.entries[1, 0]))
    res.append(CheckResult("coupling reciprocity |Z12-Z21| (ohm)", sym, 1e-9,
                           sym <= 1e-9))
    return res


def check_thermal_scales(strict: bool = False,
                         tissue: TissueParams | None = None) -> list[CheckResult]:
    """Perfusion time constant and length scale from the skin defaults."""
    tissue = tissue if tissue is not None else TissueParams.skin_defaults()
    tau, r_th = characteristic_scales(tissue)
    tau_lo, tau_hi = (500.0, 512.0) if strict else (495.0, 515.0)
    r_lo, r_hi = (7.0e-3, 7.15e-3) if strict else (6.9e-3, 7.2e-3)
    return [
        CheckResult("perfusion time constant (s)", tau, tau_hi,
                    tau_lo <= tau <= tau_hi, f"expected [{tau_lo}, {tau_hi}]"),
        CheckResult("perfusion length scale (m)", r_th, r_hi,
                    r_lo <= r_th <= r_hi, f"expected [{r_lo}, {r_hi}]"),
    ]


def check_convolution_vs_step(strict: bool = False) -> list[CheckResult]:
    """Discrete convolution under constant drive vs the closed-form step
    response over 10..360 s."""
    tissue = TissueParams.skin_defaults()
    dt = 0.1
    kernel = kernel_coefficients(tissue, dt)
    state = ThermalState(1, kernel)
    pd = np.array([20.0])
    n_slots = int(round(360.0 / dt))
    worst = 0.0
    for n in range(1, n_slots + 1):
        t = temperature_step(state, kernel, pd)
        time_s = n * dt
        if time_s >= 10.0:
            ref = 20.0 * step_response(kernel, time_s)
            worst = max(worst, abs(t[0] - ref) / ref)
    limit = 0.005 if strict else 0.01
    return [CheckResult("convolution vs closed-form step (rel)", worst, limit,
                        worst <= limit)]


def check_eigenpair(strict: bool = False) -> list[CheckResult]:
    """Dominant eigenpair beats 10^4 random Rayleigh quotients and satisfies
    its residual bound."""
    rng = np.random.default_rng(2024)
    x = rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))
    a = 0.5 * (x + x.conj().T)
    lam, v = dominant_eigenpair(a, tol=1e-9)
    samples = rng.standard_normal((10_000, 4)) + 1j * rng.standard_normal((10_000, 4))
    samples /= np.linalg.norm(samples, axis=1, keepdims=True)
    rayleigh = np.real(np.einsum("ki,ij,kj->k", samples.conj(), a, samples))
    gap = float(lam - rayleigh.max())
    residual = float(np.linalg.norm(a @ v - lam * v) / np.linalg.norm(a))
    tol = 5e-10 if strict else 1e-9
    return [
        CheckResult("dominant eigenvalue minus best sampled Rayleigh quotient", gap, 0.0,
                    gap >= -1e-12, "must be >= 0"),
        CheckResult("eigenpair residual (rel)", residual, tol, residual <= tol),
    ]


def run_checks(strict: bool = False) -> list[CheckResult]:
    results: list[CheckResult] = []
    results += check_thermal_scales(strict)
    results += check_convolution_vs_step(strict)
    results += check_eigenpair(strict)
    results += check_impedance(strict)
    results += check_dipole_far_field(strict)
    return results
