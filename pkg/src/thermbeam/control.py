"""Online beamforming policies and their shared primitives.

The adaptive policy trades instantaneous array gain against queued
temperature debt: per-point virtual queues accumulate threshold violations,
and each slot transmits along the dominant eigenvector of a gain-minus-
penalty matrix (or stays silent when no direction has positive value).
Baseline policies cover fixed and per-slot power back-off and a per-slot
constrained maximizer.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .channel import _entries
from .exposure import ExposureManifold, incident_pd
from .thermal import ThermalKernel


@dataclass(frozen=True)
class ControlConfig:
    """Controller parameters: reward weight, temperature threshold, power
    budget, and the instantaneous power-density limit used by the baselines."""

    v_param: float  # reward weight, >= 0
    temp_threshold: float  # C
    p_max: float  # W
    pd_limit: float  # W/m^2, baselines only
    eig_tolerance: float = 1e-9

    def __post_init__(self):
        if self.v_param < 0:
            raise ValueError("v_param must be >= 0")
        for name in ("temp_threshold", "p_max", "pd_limit", "eig_tolerance"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")


@dataclass(frozen=True)
class BoundParams:
    """Inputs of the diagnostic performance bound: an a-priori temperature
    bound and the drift constant (M/2)(T_max + T_th)^2 derived from it."""

    t_max: float
    b_const: float

    @classmethod
    def from_threshold(cls, t_max: float, temp_threshold: float, n_points: int) -> "BoundParams":
        return cls(t_max=t_max, b_const=0.5 * n_points * (t_max + temp_threshold) ** 2)

    def covers(self, observed_max_temp: float) -> bool:
        """Post-hoc consistency: the a-priori bound must dominate the run's
        observed maximum temperature, else the drift constant is invalid."""
        return observed_max_temp <= self.t_max


def queue_update(queues: np.ndarray, temps: np.ndarray, temp_threshold: float) -> np.ndarray:
    """Advance the per-point violation queues: Q <- max(0, Q + T - T_th)."""
    return np.maximum(0.0, np.asarray(queues, dtype=float) + np.asarray(temps, dtype=float) - temp_threshold)


def decision_matrix(h, manifold: ExposureManifold, queues: np.ndarray,
                    kernel: ThermalKernel, cfg: ControlConfig) -> np.ndarray:
    """Hermitian per-slot trade-off matrix V H^H H - c sum_m Q_m Phi_m^H Phi_m.

    The penalty coefficient c = xi_0 * prefactor / (2 eta) converts a drive
    vector's quadratic form into this slot's temperature deposit, so queue
    units and reward weighting stay dimensionally consistent.
    """
    hm = _entries(h)
    q = np.asarray(queues, dtype=float)
    if q.shape[0] != manifold.n_points:
        raise ValueError("queue length must match the number of sampling points")
    c_pen = kernel.xi[0] * kernel.prefactor / (2.0 * manifold.eta)
    a = cfg.v_param * (hm.conj().T @ hm)
    if np.any(q > 0):
        phi = manifold.matrices
        a = a - c_pen * np.einsum("m,mci,mcj->ij", q, phi.conj(), phi)
    return 0.5 * (a + a.conj().T)


def dominant_eigenpair(a: np.ndarray, tol: float = 1e-9) -> tuple[float, np.ndarray]:
    """Largest eigenvalue and unit eigenvector of a Hermitian matrix.

    The eigenvector phase is fixed by making its first significant component
    real and positive, so repeated runs pick the identical vector.
    """
    a = np.asarray(a, dtype=complex)
    scale = np.linalg.norm(a)
    if np.linalg.norm(a - a.conj().T) > max(tol, 1e-12) * max(scale, 1.0):
        raise ValueError("matrix must be Hermitian")
    vals, vecs = np.linalg.eigh(0.5 * (a + a.conj().T))
    lam = float(vals[-1])
    v = vecs[:, -1]
    idx = np.argmax(np.abs(v) > 1e-12)
    phase = v[idx] / abs(v[idx])
    v = v * np.conj(phase)
    residual = np.linalg.norm(a @ v - lam * v)
    if residual > tol * max(scale, 1.0):
        raise ValueError(f"eigenpair residual {residual:.3g} exceeds tolerance")
    return lam, v


def lyapunov_beamformer(a: np.ndarray, p_max: float,
                        tol: float = 1e-9) -> tuple[np.ndarray, float]:
    """Per-slot closed-form policy: full power along the dominant eigenvector
    when it has positive value, otherwise the zero vector (silent mode).

    Returns (w, lambda_max).
    """
    lam, v = dominant_eigenpair(a, tol)
    if lam > 0:
        return np.sqrt(p_max) * v, lam
    return np.zeros(a.shape[0], dtype=complex), lam


def unconstrained_beamformer(h, p_max: float) -> np.ndarray:
    """Full-power transmission along the top right-singular direction of H."""
    hm = _entries(h)
    b = hm.conj().T @ hm
    _, v = dominant_eigenpair(0.5 * (b + b.conj().T), tol=1e-6)
    return np.sqrt(p_max) * v


def adaptive_backoff_beamformer(h, manifold: ExposureManifold,
                                cfg: ControlConfig) -> np.ndarray:
    """Keep the unconstrained direction, scale power so the peak instantaneous
    power density stays at or below the limit."""
    direction = unconstrained_beamformer(h, 1.0)
    pd_per_watt = float(np.max(incident_pd(manifold, direction)))
    if pd_per_watt * cfg.p_max <= cfg.pd_limit:
        power = cfg.p_max
    else:
        power = cfg.pd_limit / pd_per_watt
    return np.sqrt(power) * direction


def worst_case_backoff_power(grid_states: Iterable[tuple[object, ExposureManifold]],
                             cfg: ControlConfig) -> float:
    """Fixed transmit power: the minimum adaptive back-off power over a
    deterministic grid of poses, so the limit holds at every grid pose."""
    power = np.inf
    count = 0
    for h, manifold in grid_states:
        w = adaptive_backoff_beamformer(h, manifold, cfg)
        power = min(power, float(np.real(np.vdot(w, w))))
        count += 1
    if count == 0:
        raise ValueError("worst-case grid is empty")
    return power


def per_slot_optimal_beamformer(h, manifold: ExposureManifold, cfg: ControlConfig,
                                rng: np.random.Generator | None = None,
                                extra_starts: Iterable[np.ndarray] = (),
                                n_starts: int = 16, n_iter: int = 100) -> np.ndarray:
    """Heuristic per-slot maximizer of array gain under power and peak
    power-density limits.

    Multi-start projected gradient ascent on the power sphere; feasibility is
    restored after each iterate by radial scaling (power density is quadratic
    in the drive, so scaling moves a point onto the limit surface without
    changing direction). The start set contains the unconstrained direction
    and the adaptive back-off point, so the result never falls below either.
    """
    hm = _entries(h)
    n_t = hm.shape[1]
    b = hm.conj().T @ hm
    b = 0.5 * (b + b.conj().T)
    pd_mats = np.einsum("mci,mcj->mij", manifold.matrices.conj(), manifold.matrices)
    pd_mats = pd_mats / (2.0 * manifold.eta)

    def max_pd(rows: np.ndarray) -> np.ndarray:
        return np.real(np.einsum("ki,mij,kj->km", rows.conj(), pd_mats, rows)).max(axis=1)

    def objective(rows: np.ndarray) -> np.ndarray:
        return np.real(np.einsum("ki,ij,kj->k", rows.conj(), b, rows))

    def feasible(rows: np.ndarray) -> np.ndarray:
        peak = max_pd(rows)
        scale = np.ones(rows.shape[0])
        over = peak > cfg.pd_limit
        scale[over] = np.sqrt(cfg.pd_limit / peak[over])
        return rows * scale[:, None]

    starts = [unconstrained_beamformer(hm, cfg.p_max),
              adaptive_backoff_beamformer(hm, manifold, cfg)]
    for s in extra_starts:
        s = np.asarray(s, dtype=complex)
        norm = np.linalg.norm(s)
        if norm > 0:
            starts.append(np.sqrt(cfg.p_max) * s / norm)
    rng = rng if rng is not None else np.random.default_rng(0)
    while len(starts) < n_starts:
        s = rng.standard_normal(n_t) + 1j * rng.standard_normal(n_t)
        starts.append(np.sqrt(cfg.p_max) * s / np.linalg.norm(s))
    rows = np.stack(starts[:n_starts])
    norms = np.linalg.norm(rows, axis=1, keepdims=True)
    norms[norms == 0] = 1.0
    rows = np.sqrt(cfg.p_max) * rows / norms

    best = feasible(rows)
    best_val = objective(best)
    lam_top = float(np.linalg.eigvalsh(b)[-1])
    for it in range(n_iter):
        if lam_top <= 0:
            break
        # gradient of the post-scaling objective: on the sphere the gain is
        # w^H B w when the density limit is slack and (limit / peak) w^H B w
        # when it binds, so the active point's quadratic form enters the
        # ascent direction with a negative weight
        pd_all = np.real(np.einsum("ki,mij,kj->km", rows.conj(), pd_mats, rows))
        peak = pd_all.max(axis=1)
        active = pd_all.argmax(axis=1)
        gain = objective(rows)
        grad = rows @ b.conj()
        binding = peak > cfg.pd_limit
        if np.any(binding):
            g_rows = np.einsum("kij,kj->ki", pd_mats[active[binding]], rows[binding])
            scale_g = (cfg.pd_limit / peak[binding])[:, None]
            grad[binding] = scale_g * grad[binding] - (
                (cfg.pd_limit * gain[binding] / peak[binding] ** 2)[:, None] * g_rows)
        gnorm = np.linalg.norm(grad, axis=1, keepdims=True)
        gnorm[gnorm == 0] = 1.0
        step = np.sqrt(cfg.p_max) * (0.3 if it < n_iter // 2 else 0.05)
        rows = rows + step * grad / gnorm
        norms = np.linalg.norm(rows, axis=1, keepdims=True)
        norms[norms == 0] = 1.0
        rows = np.sqrt(cfg.p_max) * rows / norms
        cand = feasible(rows)
        vals = objective(cand)
        improved = vals > best_val
        best[improved] = cand[improved]
        best_val[improved] = vals[improved]
    k = int(np.argmax(best_val))
    w = best[k]
    # belt-and-braces clamp against accumulated rounding
    peak = max_pd(w[None, :])[0]
    if peak > cfg.pd_limit * (1.0 + 1e-12):
        w = w * np.sqrt(cfg.pd_limit / peak)
    nrm2 = float(np.real(np.vdot(w, w)))
    if nrm2 > cfg.p_max:
        w = w * np.sqrt(cfg.p_max / nrm2)
    return w


def bound_gap(avg_gain: float, g_ref: float, bound: BoundParams, cfg: ControlConfig) -> float:
    """Diagnostic gap between the achieved average gain and the lower bound
    g_ref - B/V built from a reference policy's average gain."""
    if not cfg.v_param > 0:
        raise ValueError("bound gap requires v_param > 0")
    return float(avg_gain - (g_ref - bound.b_const / cfg.v_param))
