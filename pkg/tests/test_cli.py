import json
from pathlib import Path

import numpy as np
import pytest

from thermbeam.cli import load_config, load_manifest, main
from thermbeam.errors import ConfigError
from thermbeam.sim import run_simulation
from thermbeam.trace_io import read_trace_csv, trace_columns, write_trace_csv
from thermbeam.validate import check_thermal_scales, run_checks
from thermbeam.thermal import TissueParams, perfusion_si

MINI = """
scheme = unconstrained
n_slots = 5
n_rx = 8
seed = 3
"""


def write_cfg(tmp_path, text=MINI, name="mini.cfg"):
    p = tmp_path / name
    p.write_text(text)
    return p


class TestConfigParsing:
    def test_roundtrip_defaults(self, tmp_path):
        cfg = load_config(write_cfg(tmp_path))
        assert cfg.scheme == "unconstrained"
        assert cfg.n_slots == 5
        assert cfg.n_rx == 8
        assert cfg.frequency_hz == 30e9

    def test_missing_required_key_named(self, tmp_path):
        p = write_cfg(tmp_path, "n_slots = 5\n")
        with pytest.raises(ConfigError, match="scheme"):
            load_config(p)

    def test_unknown_key_named(self, tmp_path):
        p = write_cfg(tmp_path, MINI + "bogus_key = 1\n")
        with pytest.raises(ConfigError, match="bogus_key"):
            load_config(p)

    def test_head_center_parsing(self, tmp_path):
        p = write_cfg(tmp_path, MINI + "head_center_m = 1 2 3\n")
        cfg = load_config(p)
        assert cfg.head_center_m == (1.0, 2.0, 3.0)

    def test_comments_and_blank_lines(self, tmp_path):
        p = write_cfg(tmp_path, "# a comment\n\nscheme = lyapunov  # inline\nn_slots = 2\nn_rx = 4\n")
        assert load_config(p).scheme == "lyapunov"

    def test_manifest_parsing(self, tmp_path):
        write_cfg(tmp_path)
        m = tmp_path / "m.manifest"
        m.write_text("config = mini.cfg\nsweep.v_param = 1e-5 1e-4\nseeds = 1 2\n")
        manifest = load_manifest(m)
        assert manifest.axes == [("v_param", [1e-5, 1e-4])]
        assert manifest.seeds == [1, 2]

    def test_manifest_unknown_axis(self, tmp_path):
        write_cfg(tmp_path)
        m = tmp_path / "m.manifest"
        m.write_text("config = mini.cfg\nsweep.nope = 1 2\n")
        with pytest.raises(ConfigError, match="nope"):
            load_manifest(m)


class TestCmdRun:
    def test_writes_outputs(self, tmp_path, capsys):
        cfg = write_cfg(tmp_path)
        out = tmp_path / "out"
        assert main(["run", str(cfg), "--out", str(out)]) == 0
        trace = (out / "trace.csv").read_text().splitlines()
        assert len(trace) == 5 + 1
        header = trace[0].split(",")
        assert header == trace_columns(4, 15)
        summary = json.loads((out / "summary.json").read_text())
        assert summary["config"]["scheme"] == "unconstrained"
        assert "avg_snr_db" in summary["summary"]
        notes = summary["summary"]["notes"]
        assert notes["blood_perfusion_si_m3_per_s_kg"] == pytest.approx(
            perfusion_si(106.0))
        assert "penalty" in notes["queue_penalty_includes_thermal_prefactor"]

    def test_missing_key_exit_code(self, tmp_path, capsys):
        p = write_cfg(tmp_path, "n_slots = 5\n")
        assert main(["run", str(p)]) == 2
        assert "scheme" in capsys.readouterr().err

    def test_nonexistent_config_exit_code(self, tmp_path, capsys):
        assert main(["run", str(tmp_path / "nope.cfg")]) == 2

    def test_seed_override(self, tmp_path):
        cfg = write_cfg(tmp_path)
        out1, out2 = tmp_path / "a", tmp_path / "b"
        main(["run", str(cfg), "--out", str(out1), "--seed", "11"])
        main(["run", str(cfg), "--out", str(out2), "--seed", "12"])
        assert (out1 / "trace.csv").read_text() != (out2 / "trace.csv").read_text()

    def test_determinism_byte_identical(self, tmp_path):
        cfg = write_cfg(tmp_path, MINI.replace("n_slots = 5", "n_slots = 50"))
        out1, out2 = tmp_path / "a", tmp_path / "b"
        main(["run", str(cfg), "--out", str(out1)])
        main(["run", str(cfg), "--out", str(out2)])
        assert (out1 / "trace.csv").read_bytes() == (out2 / "trace.csv").read_bytes()

    def test_env_output_root(self, tmp_path, monkeypatch):
        cfg = write_cfg(tmp_path)
        monkeypatch.setenv("THERMBEAM_OUTPUT_ROOT", str(tmp_path / "root"))
        monkeypatch.chdir(tmp_path)
        assert main(["run", str(cfg)]) == 0
        assert (tmp_path / "root" / "mini" / "trace.csv").is_file()


class TestCsvRoundTrip:
    def test_floats_roundtrip_exactly(self, tmp_path):
        cfg = load_config(write_cfg(tmp_path))
        trace = run_simulation(cfg)
        path = write_trace_csv(trace, tmp_path / "trace.csv")
        cols = read_trace_csv(path)
        for i, rec in enumerate(trace.records):
            assert cols["slot"][i] == rec.slot
            assert cols["power_w"][i] == rec.power_w
            assert cols["ue_x"][i] == rec.pose.center[0]
            for m in range(cfg.n_sampling_points):
                assert cols[f"pd_m{m + 1}"][i] == rec.pd[m]
                assert cols[f"t_m{m + 1}"][i] == rec.temps[m]
            for t in range(cfg.n_tx):
                assert cols[f"w_re_{t + 1}"][i] == rec.w[t].real
                assert cols[f"w_im_{t + 1}"][i] == rec.w[t].imag


class TestCmdSweep:
    def test_single_point_matches_run(self, tmp_path):
        cfg = write_cfg(tmp_path)
        out_run = tmp_path / "run_out"
        main(["run", str(cfg), "--out", str(out_run)])
        m = tmp_path / "one.manifest"
        m.write_text("config = mini.cfg\n")
        out_sweep = tmp_path / "sweep_out"
        assert main(["sweep", str(m), "--out", str(out_sweep)]) == 0
        run_dirs = sorted(d for d in out_sweep.iterdir() if d.is_dir())
        assert len(run_dirs) == 1
        assert (run_dirs[0] / "trace.csv").read_bytes() == (out_run / "trace.csv").read_bytes()

    def test_axis_sweep_rows(self, tmp_path):
        cfg = write_cfg(tmp_path)
        m = tmp_path / "v.manifest"
        m.write_text("config = mini.cfg\nsweep.v_param = 1e-5 1e-4 5e-4 1e-3\n")
        out = tmp_path / "vs"
        assert main(["sweep", str(m), "--out", str(out)]) == 0
        lines = (out / "sweep.csv").read_text().splitlines()
        assert len(lines) == 5
        header = lines[0].split(",")
        assert header[:4] == ["run", "status", "seed", "v_param"]
        assert all(line.split(",")[1] == "ok" for line in lines[1:])

    def test_scheme_sweep_labels(self, tmp_path):
        cfg = write_cfg(tmp_path)
        m = tmp_path / "s.manifest"
        m.write_text("config = mini.cfg\n"
                     "sweep.scheme = lyapunov adaptive_backoff unconstrained\n")
        out = tmp_path / "ss"
        assert main(["sweep", str(m), "--out", str(out)]) == 0
        lines = (out / "sweep.csv").read_text().splitlines()
        schemes = [line.split(",")[3] for line in lines[1:]]
        assert schemes == ["lyapunov", "adaptive_backoff", "unconstrained"]

    def test_partial_failure_recorded(self, tmp_path, capsys):
        cfg = write_cfg(tmp_path)
        m = tmp_path / "bad.manifest"
        # second point puts the annulus inside the head -> that run fails
        m.write_text("config = mini.cfg\nsweep.d_exp_m = 0.09 0.01\n")
        out = tmp_path / "pf"
        assert main(["sweep", str(m), "--out", str(out)]) == 1
        lines = (out / "sweep.csv").read_text().splitlines()
        statuses = [line.split(",")[1] for line in lines[1:]]
        assert statuses == ["ok", "failed"]

    def test_parallel_jobs_match_serial(self, tmp_path):
        cfg = write_cfg(tmp_path)
        m = tmp_path / "p.manifest"
        m.write_text("config = mini.cfg\nsweep.seed = 1 2\n")
        out1, out2 = tmp_path / "serial", tmp_path / "parallel"
        assert main(["sweep", str(m), "--out", str(out1)]) == 0
        assert main(["sweep", str(m), "--out", str(out2), "--jobs", "2"]) == 0
        assert (out1 / "sweep.csv").read_text() == (out2 / "sweep.csv").read_text()


class TestCmdValidate:
    def test_all_checks_pass(self, capsys):
        assert main(["validate"]) == 0
        out = capsys.readouterr().out
        assert "[FAIL]" not in out
        assert "[PASS]" in out

    def test_negative_control_perturbed_conductivity(self):
        base = TissueParams.skin_defaults()
        perturbed = TissueParams(
            thermal_conductivity=1.1 * base.thermal_conductivity,
            density=base.density, specific_heat=base.specific_heat,
            blood_perfusion=base.blood_perfusion,
            transmission_coeff=base.transmission_coeff)
        results = check_thermal_scales(tissue=perturbed)
        assert any(not r.passed for r in results)

    def test_strict_mode_passes(self):
        results = run_checks(strict=True)
        assert all(r.passed for r in results)


class TestShippedConfigs:
    CONFIG_DIR = Path(__file__).resolve().parent.parent / "configs"

    def test_paper_default_loads(self):
        cfg = load_config(self.CONFIG_DIR / "paper_default.cfg")
        assert cfg.scheme == "lyapunov"
        assert cfg.n_slots == 3600
        assert cfg.v_param == 5e-4
        cfg.validate()

    def test_all_manifests_load(self):
        for manifest in sorted(self.CONFIG_DIR.glob("*.manifest")):
            m = load_manifest(manifest)
            load_config(m.config_path).validate()

    def test_default_run_completes_quickly(self, tmp_path):
        import time

        t0 = time.perf_counter()
        assert main(["run", str(self.CONFIG_DIR / "paper_default.cfg"),
                     "--out", str(tmp_path / "out")]) == 0
        elapsed = time.perf_counter() - t0
        assert (tmp_path / "out" / "trace.csv").is_file()
        assert elapsed < 60.0
