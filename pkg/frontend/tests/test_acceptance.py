"""Secondary acceptance: every figure kind renders from real simulator
outputs, and the temperature plot shows the threshold reference line.

The simulator CLI generates the inputs here from runtime-reduced copies of
the shipped example configs (same schema, fewer slots), so this test needs
the ``thermbeam`` executable on PATH.
"""

import shutil
import subprocess
from pathlib import Path

import numpy as np
import pytest

from thermbeam_plots import FigureSpec, build_figure, render

pytestmark = pytest.mark.skipif(shutil.which("thermbeam") is None,
                                reason="simulator CLI not installed")

BASE = """
scheme = lyapunov
n_slots = 120
n_rx = 8
temp_threshold_c = 0.05
d_min_m = 0.07
d_max_m = 0.11
seed = 1
"""


def sh(*args):
    res = subprocess.run([str(a) for a in args], capture_output=True, text=True)
    assert res.returncode == 0, res.stderr
    return res


@pytest.fixture(scope="module")
def outputs(tmp_path_factory):
    root = tmp_path_factory.mktemp("example_outputs")
    cfg = root / "base.cfg"
    cfg.write_text(BASE)
    sh("thermbeam", "run", cfg, "--out", root / "run")

    probe = root / "probe.cfg"
    probe.write_text(BASE.replace("scheme = lyapunov", "scheme = unconstrained")
                     + "tilt_range_deg = 0\npolar_range_deg = 0\nn_slots = 20\n")
    (root / "pd.manifest").write_text(
        "config = probe.cfg\nsweep.d_exp_m = 0.1 0.2 0.3\nsweep.tilt_center_deg = 0 60\n")
    sh("thermbeam", "sweep", root / "pd.manifest", "--out", root / "pd")

    (root / "v.manifest").write_text(
        "config = base.cfg\nsweep.v_param = 1e-5 1e-4 1e-3\n")
    sh("thermbeam", "sweep", root / "v.manifest", "--out", root / "v")

    (root / "power.manifest").write_text(
        "config = base.cfg\nsweep.p_max_w = 1 5\nsweep.scheme = lyapunov adaptive_backoff\n")
    sh("thermbeam", "sweep", root / "power.manifest", "--out", root / "power")

    (root / "dist.manifest").write_text(
        "config = base.cfg\nsweep.d_exp_m = 0.08 0.2 0.5\nsweep.scheme = lyapunov unconstrained\n")
    sh("thermbeam", "sweep", root / "dist.manifest", "--out", root / "dist")

    cfg2 = root / "base2.cfg"
    cfg2.write_text(BASE.replace("scheme = lyapunov", "scheme = adaptive_backoff"))
    sh("thermbeam", "run", cfg2, "--out", root / "run2")
    return root


def test_all_six_kinds_render(outputs, tmp_path):
    jobs = [
        ("pd_vs_distance", [outputs / "pd" / "sweep.csv"]),
        ("temp_evolution", [outputs / "run" / "trace.csv"]),
        ("v_tradeoff", [outputs / "v" / "sweep.csv"]),
        ("snr_vs_power", [outputs / "power" / "sweep.csv"]),
        ("snr_cdf", [outputs / "run" / "trace.csv", outputs / "run2" / "trace.csv"]),
        ("snr_vs_distance", [outputs / "dist" / "sweep.csv"]),
    ]
    for kind, inputs in jobs:
        out = render(FigureSpec(kind=kind, inputs=inputs,
                                output=tmp_path / f"{kind}.svg"))
        assert out.is_file() and out.stat().st_size > 0, kind
        print(f"[PASS] criterion 11 ({kind}): rendered {out.name}")


def test_temp_evolution_shows_threshold(outputs, tmp_path):
    spec = FigureSpec(kind="temp_evolution", inputs=[outputs / "run" / "trace.csv"],
                      output=tmp_path / "temp.svg")
    fig = build_figure(spec)
    assert any(np.all(np.asarray(ln.get_ydata()) == 0.05)
               for ax in fig.axes for ln in ax.get_lines())
    print("[PASS] criterion 11 (temp_evolution): threshold line present")
