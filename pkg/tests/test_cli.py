import json
from pathlib import Path

import numpy as np
from click.testing import CliRunner

from discflux.cli import main


def run_cli(*args, env=None):
    return CliRunner().invoke(main, list(args), env=env, catch_exceptions=False)


def test_check_crossing_exit_codes():
    ok = run_cli("check-crossing", "--flux", "demo-cross")
    assert ok.exit_code == 0
    payload = json.loads(ok.output)
    assert payload["holds"] is True

    bad = run_cli("check-crossing", "--flux", "demo-swapped")
    assert bad.exit_code == 1
    payload = json.loads(bad.output)
    assert payload["holds"] is False
    assert payload["witness"] == [0.75, 0.25]


def test_unknown_flux_is_usage_error():
    res = run_cli("check-crossing", "--flux", "no-such-pair")
    assert res.exit_code == 2


def test_solve_writes_run_and_verify_passes(tmp_path):
    res = run_cli(
        "solve", "--flux", "burgers-like",
        "--transform", "connection", "--connection", "0.75:0.25",
        "--u0", "steady", "--cells", "64", "--t-end", "0.05",
        "--out", str(tmp_path),
    )
    assert res.exit_code == 0, res.output
    run_dirs = [p for p in tmp_path.iterdir() if p.is_dir()]
    assert len(run_dirs) == 1
    assert (run_dirs[0] / "manifest.json").exists()
    assert "flux mismatch=0.000e+00" in res.output

    ver = run_cli("verify", "--run", str(run_dirs[0]))
    assert ver.exit_code == 0, ver.output
    assert "FAIL" not in ver.output


def test_solve_honours_env_output_root(tmp_path):
    res = run_cli(
        "solve", "--flux", "burgers-like", "--u0", "constant:0.5",
        "--cells", "64", "--t-end", "0.02",
        env={"DISCFLUX_OUT": str(tmp_path / "envout")},
    )
    assert res.exit_code == 0, res.output
    assert (tmp_path / "envout").exists()


def test_solve_config_file_with_flag_override(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"cells": 64, "t_end": 0.02, "snapshots": 5}))
    res = run_cli(
        "solve", "--flux", "burgers-like", "--u0", "constant:0.4",
        "--config", str(cfg), "--t-end", "0.01", "--out", str(tmp_path / "o"),
    )
    assert res.exit_code == 0, res.output
    run_dir = next((tmp_path / "o").iterdir())
    manifest = json.loads((run_dir / "manifest.json").read_text())
    assert manifest["config"]["cells"] == 64        # from the file
    assert manifest["config"]["t_end"] == 0.01      # flag wins

    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"cellz": 10}))
    res = run_cli("solve", "--flux", "burgers-like", "--u0", "constant:0.4",
                  "--config", str(bad))
    assert res.exit_code == 2


def test_build_transform_translation(tmp_path):
    out = tmp_path / "shift.csv"
    res = run_cli("build-transform", "--flux", "demo-swapped",
                  "--mode", "translation", "--out", str(out))
    assert res.exit_code == 0, res.output
    assert out.exists() and out.with_suffix(".json").exists()
    meta = json.loads(out.with_suffix(".json").read_text())
    assert meta["kind"] == "translation"
    k_l, k_r = meta["shifts"]
    assert k_l > k_r


def test_build_transform_requires_connection_states(tmp_path):
    res = run_cli("build-transform", "--flux", "burgers-like",
                  "--mode", "connection", "--out", str(tmp_path / "c.csv"))
    assert res.exit_code == 2


def test_riemann_command(tmp_path):
    res = run_cli("riemann", "--flux", "burgers-like", "--left", "0.25", "--right", "0.75")
    assert res.exit_code == 0
    assert "shock" in res.output and "speed 0" in res.output

    out = tmp_path / "prof.csv"
    res = run_cli("riemann", "--flux", "burgers-like", "--left", "0.75",
                  "--right", "0.25", "--out", str(out))
    assert res.exit_code == 0
    data = np.loadtxt(out, delimiter=",", skiprows=1)
    assert data.shape[1] == 2
    assert np.all(np.diff(data[:, 1]) <= 1e-12)


def test_sweep_command():
    res = run_cli("sweep", "--flux", "burgers-like", "--u0", "riemann:0.25:0.75",
                  "--levels", "2", "--cells", "64", "--t-end", "0.05")
    assert res.exit_code == 0, res.output
    assert "L1 gap" in res.output
    assert "converging" in res.output


def test_solve_rejects_unusable_transform():
    res = run_cli("solve", "--flux", "demo-swapped", "--u0", "constant:0.5",
                  "--cells", "64", "--t-end", "0.01")
    assert res.exit_code == 2
