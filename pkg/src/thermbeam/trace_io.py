"""Stable on-disk formats: per-slot trace CSV and run summary JSON.

The column order is fixed and documented in the README; floats carry 17
significant digits so values round-trip exactly.
"""

from __future__ import annotations

import dataclasses
import json
from pathlib import Path

import numpy as np

from .sim import ScenarioConfig, SimulationTrace


def _fmt(x: float) -> str:
    return f"{float(x):.17g}"


def trace_columns(n_tx: int, n_points: int) -> list[str]:
    cols = ["slot", "ue_x", "ue_y", "ue_z", "alpha", "beta",
            "power_w", "snr_db", "lambda_max", "silent"]
    cols += [f"pd_m{i}" for i in range(1, n_points + 1)]
    cols += [f"t_m{i}" for i in range(1, n_points + 1)]
    cols += [f"q_m{i}" for i in range(1, n_points + 1)]
    cols += [f"w_re_{i}" for i in range(1, n_tx + 1)]
    cols += [f"w_im_{i}" for i in range(1, n_tx + 1)]
    return cols


def write_trace_csv(trace: SimulationTrace, path) -> Path:
    path = Path(path)
    cfg = trace.config
    lines = [",".join(trace_columns(cfg.n_tx, cfg.n_sampling_points))]
    for r in trace.records:
        row = [str(r.slot),
               _fmt(r.pose.center[0]), _fmt(r.pose.center[1]), _fmt(r.pose.center[2]),
               _fmt(r.pose.tilt_angle), _fmt(r.pose.polar_angle),
               _fmt(r.power_w), _fmt(r.snr_db), _fmt(r.lambda_max),
               str(int(r.silent))]
        row += [_fmt(v) for v in r.pd]
        row += [_fmt(v) for v in r.temps]
        row += [_fmt(v) for v in r.queues]
        row += [_fmt(v) for v in np.real(r.w)]
        row += [_fmt(v) for v in np.imag(r.w)]
        lines.append(",".join(row))
    path.write_text("\n".join(lines) + "\n")
    return path


def config_to_dict(cfg: ScenarioConfig) -> dict:
    out = dataclasses.asdict(cfg)
    out["head_center_m"] = list(np.asarray(cfg.head_center_m, dtype=float))
    return out


def write_summary_json(trace: SimulationTrace, path) -> Path:
    path = Path(path)
    payload = {"config": config_to_dict(trace.config), "summary": trace.summary}
    path.write_text(json.dumps(payload, indent=2, sort_keys=True, default=_json_default) + "\n")
    return path


def _json_default(obj):
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError(f"cannot serialize {type(obj)!r}")


def read_trace_csv(path) -> dict[str, np.ndarray]:
    """Read a trace back as a column-name -> array mapping."""
    path = Path(path)
    with path.open() as fh:
        header = fh.readline().strip().split(",")
        data = np.loadtxt(fh, delimiter=",", ndmin=2)
    if data.shape[1] != len(header):
        raise ValueError(f"column count mismatch in {path}")
    return {name: data[:, i] for i, name in enumerate(header)}
