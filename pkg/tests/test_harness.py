import json

import numpy as np
import pytest
import yaml

from voxvie import io
from voxvie.cli import main
from voxvie.config import load as load_config
from voxvie.config import normalize
from voxvie.errors import ConfigError
from voxvie.grid import VoxelGrid
from voxvie.harness import run, sweep, validate
from voxvie.presets import PRESETS, preset

TINY_RUN = {
    "device": {
        "kind": "waveguide",
        "core": "si_in_sio2",
        "vpw": 10,
        "cross_vox": [4, 3],
        "length_vox": 12,
    },
    "solver": {"tol": 1e-4, "maxit": 500},
    "preconditioner": {"kind": "one-level", "homogenization": "real-mean-x"},
}

TINY_AIR = {
    "device": {
        "kind": "waveguide",
        "core": "air",
        "vpw": 10,
        "cross_vox": [3, 2],
        "length_vox": 6,
    },
    "solver": {"tol": 1e-4, "maxit": 50},
}

TINY_SWEEP = {
    "device": {
        "kind": "waveguide",
        "core": "si_in_sio2",
        "vpw": 10,
        "cross_vox": [4, 3],
        "length_vox": 8,
    },
    "solver": {"tol": 1e-4, "maxit": 500},
    "sweep": {
        "axes": {"length_vox": [8, 12]},
        "preconditioners": [{"kind": "none"}, {"kind": "one-level"}],
    },
}


class TestConfig:
    def test_defaults_filled(self):
        cfg = normalize(dict(TINY_RUN))
        assert cfg["physics"]["wavelength_nm"] == 1550.0
        assert cfg["solver"]["restart"] is None
        assert cfg["excitation"]["standoff_lint"] == 0.5
        assert cfg["threads"] == 1

    def test_unknown_top_key_rejected(self):
        with pytest.raises(ConfigError, match="unknown keys"):
            normalize(dict(TINY_RUN, banana=1))

    def test_unknown_device_key_rejected(self):
        bad = dict(TINY_RUN, device=dict(TINY_RUN["device"], radius_lint=1.0))
        with pytest.raises(ConfigError, match="unknown keys"):
            normalize(bad)

    def test_unknown_material_rejected(self):
        bad = dict(TINY_RUN, device=dict(TINY_RUN["device"], core="adamantium"))
        with pytest.raises(ConfigError, match="material"):
            normalize(bad)

    def test_low_vpw_rejected(self):
        bad = dict(TINY_RUN, device=dict(TINY_RUN["device"], vpw=5))
        with pytest.raises(ConfigError, match="vpw"):
            normalize(bad)

    def test_sweep_axis_must_be_geometry(self):
        bad = dict(TINY_SWEEP)
        bad["sweep"] = {"axes": {"radius_lint": [1, 2]}}
        with pytest.raises(ConfigError, match="geometry parameter"):
            normalize(bad)

    def test_yaml_roundtrip(self, tmp_path):
        path = tmp_path / "cfg.yaml"
        path.write_text(yaml.safe_dump(TINY_RUN))
        cfg = load_config(path)
        assert cfg["device"]["geometry"]["length_vox"] == 12

    def test_bad_yaml_is_config_error(self, tmp_path):
        path = tmp_path / "broken.yaml"
        path.write_text("device: [unclosed")
        with pytest.raises(ConfigError):
            load_config(path)

    def test_presets_all_normalize(self):
        for name in PRESETS:
            normalize(preset(name))


class TestIORoundTrips:
    def test_field_roundtrip(self, tmp_path, rng):
        grid = VoxelGrid(3, 2, 2, 1e-8)
        field = rng.normal(size=grid.n_unknowns) + 1j * rng.normal(size=grid.n_unknowns)
        io.write_field(tmp_path / "field.bin", grid, field, wavelength=1.55e-6)
        back, sidecar = io.read_field(tmp_path / "field.bin")
        assert np.array_equal(back, field)
        assert sidecar["dims"] == [3, 2, 2]
        assert sidecar["component_order"] == "x,y,z"

    def test_kernel_roundtrip(self, tmp_path, small_kernel):
        io.write_kernel(tmp_path / "kernel.bin", small_kernel)
        back = io.read_kernel(tmp_path / "kernel.bin")
        assert np.array_equal(back.tensors, small_kernel.tensors)
        assert back.grid.dims == small_kernel.grid.dims
        assert back.k0 == small_kernel.k0

    def test_residuals_roundtrip(self, tmp_path):
        res = [1.0, 0.5, 0.01, 1e-5]
        io.write_residuals(tmp_path / "residuals.csv", res, seconds_per_iter=0.1)
        assert io.read_residuals(tmp_path / "residuals.csv") == res

    def test_csv_roundtrip(self, tmp_path):
        header = ["a", "b"]
        rows = [["1", "x"], ["2", "y"]]
        io.write_csv(tmp_path / "t.csv", header, rows)
        h, r = io.read_csv(tmp_path / "t.csv")
        assert h == header and r == rows

    def test_report_roundtrip(self, tmp_path):
        report = {"solve": {"iterations": 3}, "ok": True}
        io.write_report(tmp_path / "report.json", report)
        assert io.read_report(tmp_path / "report.json") == report


class TestRun:
    def test_air_device_one_iteration_field_is_incident(self, tmp_path):
        cfg = normalize(dict(TINY_AIR))
        outdir = run(cfg, tmp_path / "air")
        report = io.read_report(outdir / "report.json")
        assert report["solve"]["iterations"] == 1
        assert report["solve"]["converged"]
        assert report["dielectric_ratio"] == 0.0
        field, _ = io.read_field(outdir / "field.bin")
        from voxvie.harness import build_problem

        problem = build_problem(cfg)
        assert np.allclose(field, problem.e_inc)

    def test_outputs_complete_and_consistent(self, tmp_path):
        cfg = normalize(dict(TINY_RUN))
        outdir = run(cfg, tmp_path / "wg")
        for name in ("report.json", "residuals.csv", "field.bin", "field.json", "config.yaml"):
            assert (outdir / name).exists()
        report = io.read_report(outdir / "report.json")
        res = io.read_residuals(outdir / "residuals.csv")
        assert res == report["solve"]["relative_residuals"]
        assert res[0] == 1.0
        assert report["solve"]["converged"]
        # memory figures follow the accounting formulas exactly
        grid_dims = report["grid"]["dims"]
        nx, ny, nz = grid_dims
        assert report["preconditioner"]["bytes"] == nx * (3 * ny * nz) ** 2 * 16
        assert report["solve"]["memory"]["preconditioner_bytes"] == report["preconditioner"]["bytes"]
        echo = yaml.safe_load((outdir / "config.yaml").read_text())
        assert echo["device"]["geometry"]["length_vox"] == 12

    def test_preconditioned_beats_unpreconditioned(self, tmp_path):
        base = normalize(dict(TINY_RUN, preconditioner={"kind": "none"}))
        prec = normalize(dict(TINY_RUN))
        r_un = io.read_report(run(base, tmp_path / "a") / "report.json")
        r_pr = io.read_report(run(prec, tmp_path / "b") / "report.json")
        assert r_pr["solve"]["iterations"] < r_un["solve"]["iterations"]

    def test_deterministic_reruns(self, tmp_path):
        cfg = normalize(dict(TINY_RUN))
        r1 = io.read_report(run(cfg, tmp_path / "r1") / "report.json")
        r2 = io.read_report(run(cfg, tmp_path / "r2") / "report.json")
        assert r1["solve"]["iterations"] == r2["solve"]["iterations"]
        assert r1["solve"]["relative_residuals"] == r2["solve"]["relative_residuals"]


class TestSweep:
    def test_rows_match_cartesian_grid(self, tmp_path):
        cfg = normalize(dict(TINY_SWEEP))
        path = sweep(cfg, tmp_path / "s")
        header, rows = io.read_csv(path)
        assert len(rows) == 2
        assert header[0] == "length_vox"
        assert "iterations_none" in header
        assert "iterations_one_level_real_mean_x" in header
        for row in rows:
            assert row[-1] == ""  # no errors

    def test_failures_recorded_in_row(self, tmp_path):
        cfg = normalize(dict(TINY_SWEEP))
        cfg["sweep"]["axes"]["length_vox"] = [8, 10**9]  # second point must fail
        path = sweep(cfg, tmp_path / "s2")
        header, rows = io.read_csv(path)
        assert len(rows) == 2
        assert rows[0][-1] == ""
        assert rows[1][-1] != ""

    def test_threaded_sweep_matches_serial(self, tmp_path):
        cfg = normalize(dict(TINY_SWEEP))
        p1 = sweep(cfg, tmp_path / "ser")
        cfg2 = normalize(dict(TINY_SWEEP, threads=2))
        p2 = sweep(cfg2, tmp_path / "par")
        h1, r1 = io.read_csv(p1)
        h2, r2 = io.read_csv(p2)
        iters = h1.index("iterations_none")
        assert [r[iters] for r in r1] == [r[iters] for r in r2]


class TestValidate:
    def test_clean_pass(self):
        result = validate()
        assert result["passed"]
        assert len(result["checks"]) >= 6

    def test_parity_fault_detected(self):
        result = validate(inject_fault="parity")
        failed = {name for name, ok, _ in result["checks"] if not ok}
        assert "kernel parity" in failed
        assert not result["passed"]

    def test_unknown_fault_rejected(self):
        with pytest.raises(ValueError):
            validate(inject_fault="gravity")


class TestCli:
    def test_run_exit_codes(self, tmp_path):
        cfg_path = tmp_path / "cfg.yaml"
        cfg_path.write_text(yaml.safe_dump(TINY_AIR))
        assert main(["run", "--config", str(cfg_path), "--out", str(tmp_path / "o")]) == 0

    def test_config_error_exit_code(self, tmp_path):
        bad = tmp_path / "bad.yaml"
        bad.write_text(yaml.safe_dump({"device": {"kind": "warp-drive"}}))
        assert main(["run", "--config", str(bad), "--out", str(tmp_path / "o")]) == 1

    def test_requires_exactly_one_source(self, tmp_path):
        assert main(["run", "--out", str(tmp_path)]) == 1

    def test_unknown_preset(self, tmp_path):
        assert main(["run", "--preset", "nope", "--out", str(tmp_path)]) == 1

    def test_nonconvergence_exit_code(self, tmp_path):
        cfg = dict(TINY_RUN, solver={"tol": 1e-12, "maxit": 2},
                   preconditioner={"kind": "none"})
        cfg_path = tmp_path / "cfg.yaml"
        cfg_path.write_text(yaml.safe_dump(cfg))
        assert main(["run", "--config", str(cfg_path), "--out", str(tmp_path / "o")]) == 2

    def test_validate_subcommand(self, capsys):
        assert main(["validate"]) == 0
        out = capsys.readouterr().out
        assert "[PASS]" in out and "[FAIL]" not in out

    def test_validate_fault_injection(self, capsys):
        assert main(["validate", "--inject-fault", "parity"]) == 3
        assert "[FAIL] kernel parity" in capsys.readouterr().out

    def test_sweep_subcommand(self, tmp_path):
        cfg_path = tmp_path / "cfg.yaml"
        cfg_path.write_text(yaml.safe_dump(TINY_SWEEP))
        assert main(["sweep", "--config", str(cfg_path), "--out", str(tmp_path / "s")]) == 0
        assert (tmp_path / "s" / "sweep.csv").exists()

    def test_spectrum_subcommand(self, tmp_path):
        cfg = dict(TINY_RUN)
        cfg["device"] = dict(cfg["device"], cross_vox=[3, 2], length_vox=6)
        cfg_path = tmp_path / "cfg.yaml"
        cfg_path.write_text(yaml.safe_dump(cfg))
        assert main(["spectrum", "--config", str(cfg_path), "--out", str(tmp_path / "sp")]) == 0
        header, rows = io.read_csv(tmp_path / "sp" / "spectrum.csv")
        assert header == ["re_unprec", "im_unprec", "re_prec", "im_prec"]
        assert len(rows) == 3 * 6 * 3 * 2
