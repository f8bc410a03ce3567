"""Independent reference computations used by the validation suite.

These deliberately avoid the production code paths: fields come from summing
exact infinitesimal-dipole solutions over a dense current discretization, and
coupling integrals use a fixed-node composite Gauss-Legendre rule instead of
adaptive refinement.
"""

from __future__ import annotations

import numpy as np
from numpy.polynomial.legendre import leggauss

from .em import DipoleSpec, EmConstants, PlacedDipole, _coupling_kernel
from .geometry import _as_vec3


def segment_dipole_field(spec: DipoleSpec, feed_position, port_current: complex,
                         observation, consts: EmConstants,
                         n_segments: int = 10_000) -> np.ndarray:
    """Electric field of a sinusoidal-current dipole by direct summation of
    exact infinitesimal-dipole fields over ``n_segments`` current segments.

    Keeps the full 1/r, 1/r^2, 1/r^3 terms of each segment, so it is valid at
    any distance where the thin-wire current model itself holds.
    """
    feed = _as_vec3(feed_position)
    obs = _as_vec3(observation)
    n = spec.orientation
    k = consts.wavenumber
    h = spec.half_length
    i_max = port_current / np.sin(k * h)

    dl = 2.0 * h / n_segments
    l = -h + (np.arange(n_segments) + 0.5) * dl
    currents = i_max * np.sin(k * (h - np.abs(l)))

    seg_pos = feed[None, :] + l[:, None] * n[None, :]
    diff = obs[None, :] - seg_pos
    r = np.linalg.norm(diff, axis=1)
    if r.min() <= 0:
        raise ValueError("observation point lies on the wire")
    r_hat = diff / r[:, None]
    cos_t = r_hat @ n
    sin_t = np.sqrt(np.clip(1.0 - cos_t * cos_t, 0.0, 1.0))

    kr = k * r
    phase = np.exp(-1j * kr)
    moment = currents * dl
    eta = consts.eta

    # exact infinitesimal-dipole field, radial + polar components
    e_r = eta * moment * cos_t / (2.0 * np.pi * r ** 2) * (1.0 + 1.0 / (1j * kr)) * phase
    e_t = (1j * eta * k * moment * sin_t / (4.0 * np.pi * r)
           * (1.0 + 1.0 / (1j * kr) - 1.0 / kr ** 2) * phase)

    theta_hat = cos_t[:, None] * r_hat - n[None, :]
    safe = np.where(sin_t <= 1e-12, 1.0, sin_t)
    theta_hat = theta_hat / safe[:, None]
    theta_hat[sin_t <= 1e-12] = 0.0

    field = (e_r[:, None] * r_hat + e_t[:, None] * theta_hat).sum(axis=0)
    return field


def impedance_fixed_quadrature(p: PlacedDipole, q: PlacedDipole, consts: EmConstants,
                               n_nodes: int = 4096) -> complex:
    """Coupling impedance via a composite fixed-node Gauss-Legendre rule.

    The integration range splits at the current-profile kink; each half uses
    panels of a 16-point rule until ``n_nodes`` total nodes are reached.
    """
    n_p, n_q = p.spec.orientation, q.spec.orientation
    if np.linalg.norm(np.cross(n_p, n_q)) > 1e-9:
        raise ValueError("parallel axes required")
    n = n_p
    d = p.center - q.center
    sep = float(np.linalg.norm(d))
    d_par = abs(float(np.dot(d, n)))
    rho2 = max(0.0, sep * sep - d_par * d_par)
    h_p, h_q = p.spec.half_length, q.spec.half_length
    if sep <= 1e-12:
        rho2 = p.spec.wire_radius ** 2
        d_par = 0.0

    order = 16
    panels_per_half = max(1, int(np.ceil(n_nodes / (2 * order))))
    nodes, weights = leggauss(order)

    k = consts.wavenumber
    total = 0.0 + 0.0j
    for a, b in ((-h_p, 0.0), (0.0, h_p)):
        edges = np.linspace(a, b, panels_per_half + 1)
        for lo, hi in zip(edges[:-1], edges[1:]):
            half = 0.5 * (hi - lo)
            mid = 0.5 * (hi + lo)
            l = mid + half * nodes
            total += half * np.sum(weights * _coupling_kernel(l, rho2, d_par, k, h_p, h_q))

    pref = 1j * consts.eta / (4.0 * np.pi * np.sin(k * h_p) * np.sin(k * h_q))
    return complex(pref * total)
