"""Command-line entry point: run one scenario, sweep parameter grids, or run
the built-in validation suite.

Config files are flat ``key = value`` text whose keys match the
ScenarioConfig field names; ``#`` starts a comment. Sweep manifests use the
same format plus ``sweep.<key> = v1 v2 ...`` axes and a ``seeds`` list.
Exit codes: 0 ok, 1 runtime failure, 2 config error.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import os
import sys
import traceback
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from itertools import product
from pathlib import Path

from .errors import ConfigError
from .sim import ScenarioConfig, run_simulation
from .trace_io import write_summary_json, write_trace_csv
from .validate import run_checks

OUTPUT_ROOT_ENV = "THERMBEAM_OUTPUT_ROOT"

_CONFIG_FIELDS = {f.name: f for f in dataclasses.fields(ScenarioConfig)}
_INT_KEYS = {f.name for f in dataclasses.fields(ScenarioConfig) if f.type == "int"}
_REQUIRED_KEYS = ("scheme",)

SWEEP_METRICS = (
    "avg_snr_db", "snr_db_p01", "snr_db_p02", "snr_db_p10", "snr_db_p50",
    "snr_db_p90", "avg_received_gain", "avg_power_w", "final_avg_temp_c",
    "max_temp_c", "avg_queue", "silent_fraction", "avg_pd_w_m2", "max_pd_w_m2",
)


def _parse_kv_lines(path: Path) -> list[tuple[int, str, str]]:
    if not path.is_file():
        raise ConfigError(f"config file not found: {path}")
    out = []
    for lineno, raw in enumerate(path.read_text().splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected 'key = value', got {raw!r}")
        key, value = line.split("=", 1)
        out.append((lineno, key.strip(), value.strip()))
    return out


def _coerce(path: Path, lineno: int, key: str, value: str):
    if key == "scheme":
        return value
    if key == "head_center_m":
        parts = value.replace(",", " ").split()
        if len(parts) != 3:
            raise ConfigError(f"{path}:{lineno}: head_center_m needs three numbers")
        return tuple(float(p) for p in parts)
    try:
        if key in _INT_KEYS:
            return int(value, 10)
        return float(value)
    except ValueError as exc:
        raise ConfigError(f"{path}:{lineno}: bad value for '{key}': {value!r}") from exc


def load_config(path, overrides: dict | None = None) -> ScenarioConfig:
    """Parse a key=value config file into a ScenarioConfig."""
    path = Path(path)
    values: dict = {}
    for lineno, key, value in _parse_kv_lines(path):
        if key not in _CONFIG_FIELDS:
            raise ConfigError(f"{path}:{lineno}: unknown config key '{key}'")
        values[key] = _coerce(path, lineno, key, value)
    for key in _REQUIRED_KEYS:
        if key not in values:
            raise ConfigError(f"{path}: missing required key: {key}")
    if overrides:
        values.update(overrides)
    cfg = ScenarioConfig(**values)
    cfg.validate()
    return cfg


@dataclass
class RunManifest:
    """A sweep: base config, output directory, Cartesian axes, seed list."""

    config_path: Path
    out_dir: Path | None
    axes: list[tuple[str, list]]
    seeds: list[int]


def load_manifest(path) -> RunManifest:
    path = Path(path)
    config_path = None
    out_dir = None
    axes: list[tuple[str, list]] = []
    seeds = [None]
    for lineno, key, value in _parse_kv_lines(path):
        if key == "config":
            config_path = (path.parent / value).resolve() if not Path(value).is_absolute() else Path(value)
        elif key == "out":
            out_dir = Path(value)
        elif key == "seeds":
            seeds = [int(v) for v in value.split()]
        elif key.startswith("sweep."):
            name = key[len("sweep."):]
            if name not in _CONFIG_FIELDS:
                raise ConfigError(f"{path}:{lineno}: sweep axis references unknown key '{name}'")
            vals = [_coerce(path, lineno, name, v) for v in value.split()]
            if not vals:
                raise ConfigError(f"{path}:{lineno}: empty sweep axis '{name}'")
            axes.append((name, vals))
        else:
            raise ConfigError(f"{path}:{lineno}: unknown manifest key '{key}'")
    if config_path is None:
        raise ConfigError(f"{path}: missing required key: config")
    return RunManifest(config_path=config_path, out_dir=out_dir, axes=axes, seeds=seeds)


def _default_out(base_name: str, explicit) -> Path:
    if explicit:
        return Path(explicit)
    root = os.environ.get(OUTPUT_ROOT_ENV)
    if root:
        return Path(root) / base_name
    return Path("out") / base_name


def _execute_run(cfg: ScenarioConfig, out_dir: Path) -> dict:
    out_dir.mkdir(parents=True, exist_ok=True)
    trace = run_simulation(cfg)
    write_trace_csv(trace, out_dir / "trace.csv")
    write_summary_json(trace, out_dir / "summary.json")
    return trace.summary


def cmd_run(args) -> int:
    cfg = load_config(args.config, overrides={"seed": args.seed} if args.seed is not None else None)
    out_dir = _default_out(Path(args.config).stem, args.out)
    summary = _execute_run(cfg, out_dir)
    print(f"wrote {out_dir / 'trace.csv'} and summary.json "
          f"(avg SNR {summary['avg_snr_db']:.2f} dB, "
          f"final avg temp {summary['final_avg_temp_c']:.4f} C)")
    return 0


def _sweep_point(job) -> tuple[int, dict | None, str]:
    index, cfg_values, out_dir = job
    try:
        cfg = ScenarioConfig(**cfg_values)
        cfg.validate()
        summary = _execute_run(cfg, Path(out_dir))
        return index, summary, ""
    except Exception as exc:  # per-row failure must not kill the sweep
        return index, None, f"{type(exc).__name__}: {exc}"


def _fmt_cell(v) -> str:
    if isinstance(v, float):
        return f"{v:.17g}"
    return str(v)


def cmd_sweep(args) -> int:
    manifest = load_manifest(args.manifest)
    base = load_config(manifest.config_path)
    out_root = _default_out(Path(args.manifest).stem, args.out or manifest.out_dir)
    out_root.mkdir(parents=True, exist_ok=True)

    axis_names = [name for name, _ in manifest.axes]
    combos = list(product(*[vals for _, vals in manifest.axes])) or [()]
    jobs = []
    rows = []
    index = 0
    for combo in combos:
        for seed in manifest.seeds:
            values = dataclasses.asdict(base)
            values.update(dict(zip(axis_names, combo)))
            if seed is not None:
                values["seed"] = seed
            tag = "_".join(f"{n}={v}" for n, v in zip(axis_names, combo)) or "base"
            run_dir = out_root / f"run_{index:03d}_{tag}_seed{values['seed']}"
            jobs.append((index, values, str(run_dir)))
            rows.append({"run": index, "seed": values["seed"],
                         **dict(zip(axis_names, combo))})
            index += 1

    if args.jobs > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            results = list(pool.map(_sweep_point, jobs))
    else:
        results = [_sweep_point(j) for j in jobs]

    failures = 0
    for idx, summary, error in sorted(results):
        rows[idx]["status"] = "ok" if summary else "failed"
        rows[idx]["error"] = error
        for metric in SWEEP_METRICS:
            rows[idx][metric] = summary.get(metric, "") if summary else ""
        failures += 0 if summary else 1

    header = ["run", "status", "seed", *axis_names, *SWEEP_METRICS, "error"]
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(_fmt_cell(row.get(col, "")) for col in header))
    sweep_csv = out_root / "sweep.csv"
    sweep_csv.write_text("\n".join(lines) + "\n")
    print(f"wrote {sweep_csv} ({len(rows)} runs, {failures} failed)")
    return 0 if failures == 0 else 1


def cmd_validate(args) -> int:
    results = run_checks(strict=args.strict)
    for res in results:
        print(res.line())
    n_fail = sum(not r.passed for r in results)
    print(f"{len(results) - n_fail}/{len(results)} checks passed")
    return 0 if n_fail == 0 else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="thermbeam",
        description="Exposure-aware mmWave uplink simulator",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run one scenario config")
    p_run.add_argument("config", help="path to a key=value config file")
    p_run.add_argument("--out", help="output directory (default: out/<config-stem>)")
    p_run.add_argument("--seed", type=int, default=None, help="override the config seed")
    p_run.set_defaults(func=cmd_run)

    p_sweep = sub.add_parser("sweep", help="run a Cartesian parameter sweep")
    p_sweep.add_argument("manifest", help="path to a sweep manifest file")
    p_sweep.add_argument("--jobs", type=int, default=1, help="parallel worker processes")
    p_sweep.add_argument("--out", help="output root (overrides the manifest)")
    p_sweep.set_defaults(func=cmd_sweep)

    p_val = sub.add_parser("validate", help="run the built-in validation suite")
    p_val.add_argument("--strict", action="store_true", help="halve every tolerance")
    p_val.set_defaults(func=cmd_validate)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:
        print(f"runtime failure: {exc}", file=sys.stderr)
        traceback.print_exc()
        return 1


if __name__ == "__main__":
    sys.exit(main())
