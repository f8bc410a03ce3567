"""Figure builders for the six supported plot kinds.

Input contract (the simulator's documented output schema):

* ``trace.csv``: columns ``slot, ue_x, ue_y, ue_z, alpha, beta, power_w,
  snr_db, lambda_max, silent`` followed by ``pd_m1..pd_mM``, ``t_m1..t_mM``,
  ``q_m1..q_mM``, ``w_re_1..w_re_N``, ``w_im_1..w_im_N``.
* ``summary.json`` (next to a trace): ``{"config": {...}, "summary": {...}}``.
* ``sweep.csv``: ``run, status, seed`` then the swept parameter columns, then
  the metric columns starting at ``avg_snr_db``, ending with ``error``.

Rendering is deterministic: fixed SVG hash salt and no embedded timestamps.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
matplotlib.rcParams["svg.hashsalt"] = "thermbeam-plots"

import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)
import numpy as np  # noqa: E402


class SchemaError(ValueError):
    """Input file does not match the documented CSV schema."""


@dataclass
class FigureSpec:
    """One figure request: kind, input file(s), output path, styling options."""

    kind: str
    inputs: list[Path]
    output: Path
    options: dict = field(default_factory=dict)

    def __post_init__(self):
        self.inputs = [Path(p) for p in self.inputs]
        self.output = Path(self.output)
        if self.kind not in FIGURE_KINDS:
            raise SchemaError(
                f"unknown figure kind '{self.kind}'; expected one of {sorted(FIGURE_KINDS)}")
        if not self.inputs:
            raise SchemaError("at least one input file is required")
        for p in self.inputs:
            if not p.is_file():
                raise SchemaError(f"input file not found: {p}")


def read_table(path: Path) -> dict[str, list[str]]:
    """Read a CSV into column lists of raw strings."""
    with Path(path).open(newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise SchemaError(f"{path}: empty file")
    header, data = rows[0], rows[1:]
    if not data:
        raise SchemaError(f"{path}: no data rows under header {header}")
    for i, row in enumerate(data, start=2):
        if len(row) != len(header):
            raise SchemaError(f"{path}:{i}: expected {len(header)} cells, got {len(row)}")
    return {name: [row[j] for row in data] for j, name in enumerate(header)}


def floats(table: dict, name: str, path) -> np.ndarray:
    if name not in table:
        raise SchemaError(f"{path}: missing column '{name}'; found {sorted(table)}")
    try:
        return np.array([float(v) for v in table[name]])
    except ValueError as exc:
        raise SchemaError(f"{path}: column '{name}' is not numeric") from exc


def sibling_summary(trace_path: Path) -> dict | None:
    p = Path(trace_path).parent / "summary.json"
    if p.is_file():
        return json.loads(p.read_text())
    return None


def swept_columns(table: dict, path) -> list[str]:
    """Swept parameter columns of a sweep.csv: between 'seed' and 'avg_snr_db'."""
    header = list(table)
    for required in ("run", "status", "seed", "avg_snr_db"):
        if required not in header:
            raise SchemaError(f"{path}: missing column '{required}'; found {header}")
    return header[header.index("seed") + 1: header.index("avg_snr_db")]


def _ok_rows(table: dict, path) -> dict:
    if "status" not in table:
        raise SchemaError(f"{path}: missing column 'status'; found {sorted(table)}")
    keep = [i for i, s in enumerate(table["status"]) if s == "ok"]
    if not keep:
        raise SchemaError(f"{path}: no successful runs in sweep")
    return {k: [v[i] for i in keep] for k, v in table.items()}


def _series_groups(table: dict, x_key: str, path) -> list[tuple[str, list[int]]]:
    """Group sweep rows by the swept columns other than the x axis."""
    others = [c for c in swept_columns(table, path) if c != x_key]
    if not others:
        return [("", list(range(len(table["run"]))))]
    groups: dict[str, list[int]] = {}
    for i in range(len(table["run"])):
        label = ", ".join(f"{c}={table[c][i]}" for c in others)
        groups.setdefault(label, []).append(i)
    return sorted(groups.items())


def _sorted_xy(x: np.ndarray, y: np.ndarray, idx: list[int]):
    xs = x[idx]
    ys = y[idx]
    order = np.argsort(xs)
    return xs[order], ys[order]


def _pick_x_key(table: dict, options: dict, path, preferred: tuple[str, ...]) -> str:
    if "x_key" in options:
        key = options["x_key"]
        if key not in table:
            raise SchemaError(f"{path}: requested x_key '{key}' not in columns {sorted(table)}")
        return key
    swept = swept_columns(table, path)
    for name in preferred:
        if name in swept:
            return name
    if swept:
        return swept[0]
    raise SchemaError(f"{path}: no swept parameter column to use as x axis")


# -- figure builders --------------------------------------------------------


def fig_pd_vs_distance(spec: FigureSpec):
    path = spec.inputs[0]
    table = _ok_rows(read_table(path), path)
    x_key = _pick_x_key(table, spec.options, path, ("d_exp_m", "d_min_m", "d_ref_m"))
    x = floats(table, x_key, path)
    y = floats(table, "avg_pd_w_m2", path)
    fig, ax = plt.subplots(figsize=(6, 4))
    for label, idx in _series_groups(table, x_key, path):
        xs, ys = _sorted_xy(x, y, idx)
        ax.plot(xs, ys, marker="o", label=label or None)
    ax.set_xlabel(f"{x_key}")
    ax.set_ylabel("average incident power density (W/m$^2$)")
    ax.set_yscale("log")
    ax.grid(True, alpha=0.3)
    if any(lbl for lbl, _ in _series_groups(table, x_key, path)):
        ax.legend(fontsize=8)
    ax.set_title(spec.options.get("title", "Power density vs distance"))
    return fig


def fig_temp_evolution(spec: FigureSpec):
    path = spec.inputs[0]
    table = read_table(path)
    t_cols = sorted((c for c in table if c.startswith("t_m")),
                    key=lambda c: int(c[3:]))
    if not t_cols:
        raise SchemaError(f"{path}: no temperature columns 't_m*'; found {sorted(table)}")
    slots = floats(table, "slot", path)
    summary = sibling_summary(path)
    dt = None
    tth = spec.options.get("tth")
    if summary is not None:
        dt = summary.get("config", {}).get("dt_s")
        if tth is None:
            tth = summary.get("config", {}).get("temp_threshold_c")
    time_axis = slots * dt if dt else slots
    temps = np.stack([floats(table, c, path) for c in t_cols])
    fig, ax = plt.subplots(figsize=(6, 4))
    for row in temps:
        ax.plot(time_axis, row, color="0.75", lw=0.5)
    ax.plot(time_axis, temps.mean(axis=0), color="C0", lw=2.0, label="average")
    if tth is not None:
        ax.axhline(float(tth), color="C3", ls="--", lw=1.5,
                   label=f"threshold {float(tth):g} C")
    ax.set_xlabel("time (s)" if dt else "slot")
    ax.set_ylabel("temperature rise (C)")
    ax.grid(True, alpha=0.3)
    ax.legend(fontsize=8)
    ax.set_title(spec.options.get("title", "Temperature evolution"))
    return fig


def fig_v_tradeoff(spec: FigureSpec):
    path = spec.inputs[0]
    table = _ok_rows(read_table(path), path)
    x = floats(table, "v_param", path)
    snr = floats(table, "avg_snr_db", path)
    queue = floats(table, "avg_queue", path)
    fig, ax = plt.subplots(figsize=(6, 4))
    ax2 = ax.twinx()
    for label, idx in _series_groups(table, "v_param", path):
        xs, ys = _sorted_xy(x, snr, idx)
        ax.plot(xs, ys, marker="o", color="C0", label=(label + " SNR").strip())
        xs, yq = _sorted_xy(x, queue, idx)
        ax2.plot(xs, yq, marker="s", ls="--", color="C1", label=(label + " queue").strip())
    ax.set_xscale("log")
    ax.set_xlabel("reward weight")
    ax.set_ylabel("average SNR (dB)", color="C0")
    ax2.set_ylabel("average queue length", color="C1")
    ax.grid(True, alpha=0.3)
    lines = ax.get_lines() + ax2.get_lines()
    ax.legend(lines, [ln.get_label() for ln in lines], fontsize=8, loc="center right")
    ax.set_title(spec.options.get("title", "SNR / queue trade-off"))
    return fig


def fig_snr_vs_power(spec: FigureSpec):
    path = spec.inputs[0]
    table = _ok_rows(read_table(path), path)
    x = floats(table, "p_max_w", path)
    y = floats(table, "avg_snr_db", path)
    fig, ax = plt.subplots(figsize=(6, 4))
    for label, idx in _series_groups(table, "p_max_w", path):
        xs, ys = _sorted_xy(x, y, idx)
        ax.plot(xs, ys, marker="o", label=label or None)
    ax.set_xlabel("transmit power budget (W)")
    ax.set_ylabel("average SNR (dB)")
    ax.grid(True, alpha=0.3)
    if any(lbl for lbl, _ in _series_groups(table, "p_max_w", path)):
        ax.legend(fontsize=8)
    ax.set_title(spec.options.get("title", "SNR vs power budget"))
    return fig


def fig_snr_cdf(spec: FigureSpec):
    fig, ax = plt.subplots(figsize=(6, 4))
    for path in spec.inputs:
        table = read_table(path)
        snr_db = floats(table, "snr_db", path)
        summary = sibling_summary(path)
        label = Path(path).parent.name or Path(path).stem
        if summary is not None:
            label = summary.get("config", {}).get("scheme", label)
        finite = np.sort(snr_db[np.isfinite(snr_db)])
        n = snr_db.size
        # silent slots sit at -inf: the CDF starts at their fraction
        base = (n - finite.size) / n
        cdf = base + np.arange(1, finite.size + 1) / n
        ax.step(finite, cdf, where="post", label=label)
    ax.set_xlabel("SNR (dB)")
    ax.set_ylabel("CDF over slots")
    ax.set_ylim(0.0, 1.02)
    ax.grid(True, alpha=0.3)
    ax.legend(fontsize=8)
    ax.set_title(spec.options.get("title", "SNR distribution"))
    return fig


def fig_snr_vs_distance(spec: FigureSpec):
    path = spec.inputs[0]
    table = _ok_rows(read_table(path), path)
    x_key = _pick_x_key(table, spec.options, path, ("d_exp_m", "d_min_m"))
    x = floats(table, x_key, path)
    y = floats(table, "avg_snr_db", path)
    fig, ax = plt.subplots(figsize=(6, 4))
    for label, idx in _series_groups(table, x_key, path):
        xs, ys = _sorted_xy(x, y, idx)
        ax.plot(xs, ys, marker="o", label=label or None)
    ax.set_xlabel(f"{x_key}")
    ax.set_ylabel("average SNR (dB)")
    ax.grid(True, alpha=0.3)
    if any(lbl for lbl, _ in _series_groups(table, x_key, path)):
        ax.legend(fontsize=8)
    ax.set_title(spec.options.get("title", "SNR vs exposure distance"))
    return fig


FIGURE_KINDS = {
    "pd_vs_distance": fig_pd_vs_distance,
    "temp_evolution": fig_temp_evolution,
    "v_tradeoff": fig_v_tradeoff,
    "snr_vs_power": fig_snr_vs_power,
    "snr_cdf": fig_snr_cdf,
    "snr_vs_distance": fig_snr_vs_distance,
}


def build_figure(spec: FigureSpec):
    """Build the matplotlib figure for a spec without writing it."""
    return FIGURE_KINDS[spec.kind](spec)


def render(spec: FigureSpec) -> Path:
    """Render the figure to the spec's output path (vector format by default)."""
    fig = build_figure(spec)
    spec.output.parent.mkdir(parents=True, exist_ok=True)
    suffix = spec.output.suffix.lower() or ".svg"
    out = spec.output if spec.output.suffix else spec.output.with_suffix(".svg")
    metadata = {"Date": None} if suffix == ".svg" else None
    try:
        fig.savefig(out, metadata=metadata)
    finally:
        plt.close(fig)
    return out
