"""End-to-end checks of the command-line pipelines.

Everything here shells out to the real entry point so argument parsing,
exit codes, and file layout are exercised exactly as a user would hit
them. Grids and step counts are kept small; these tests check plumbing,
not physics.
"""

import json
import math
import subprocess
import sys

import numpy as np
import pytest

from fracchannel import config_hash, config_from_mapping, run
from fracchannel.runio import read_csv_columns, read_snapshots

BASE_TOML = """\
r = 2.8
seed = 11

[grid]
n_x = 24
n_z = 41

[time]
horizon = 0.5
n_steps = 64

[noise]
hurst = 0.9
n_modes = 6

[diagnostics]
qs = [1.05, 1.9]
resolutions = [65, 129]
replicas = 1
"""


def cli(*args, cwd=None):
    """Run the CLI in a subprocess; returns (exit_code, stdout, stderr)."""
    proc = subprocess.run(
        [sys.executable, "-c",
         "import sys; from fracchannel.cli import main; "
         "sys.exit(main(sys.argv[1:]))", *map(str, args)],
        capture_output=True, text=True, cwd=cwd,
    )
    return proc.returncode, proc.stdout, proc.stderr


@pytest.fixture()
def base_config(tmp_path):
    path = tmp_path / "run.toml"
    path.write_text(BASE_TOML)
    return path


def test_missing_r_rejected_naming_field(tmp_path):
    cfg = tmp_path / "bad.toml"
    cfg.write_text("[noise]\nhurst = 0.9\n")
    out = tmp_path / "out"
    code, _, err = cli("run-linear", "--config", cfg, "--out", out)
    assert code == 2
    assert "r" in err
    assert not out.exists(), "validation failure must not write outputs"


def test_bad_field_rejected_with_its_name(tmp_path):
    cfg = tmp_path / "bad.toml"
    cfg.write_text("r = 2.8\n[noise]\nhurst = 0.9\n[time]\nscheme = 'rk4'\n")
    code, _, err = cli("exponents", "--config", cfg, "--out", tmp_path / "o")
    assert code == 2
    assert "time.scheme" in err


def test_inadmissible_exponents_rejected_before_output(tmp_path):
    cfg = tmp_path / "bad.toml"
    cfg.write_text("r = 3.5\n[noise]\nhurst = 0.9\n")
    out = tmp_path / "out"
    code, _, err = cli("run-linear", "--config", cfg, "--out", out)
    assert code == 2
    assert not out.exists()


def test_exponents_pipeline_writes_ledger(base_config, tmp_path):
    out = tmp_path / "exp"
    code, stdout, _ = cli("exponents", "--config", base_config, "--out", out)
    assert code == 0
    assert str(out) in stdout
    payload = json.loads((out / "exponents.json").read_text())
    assert math.isclose(payload["q_star"], 10.0 / 7.0, rel_tol=1e-12)
    assert payload["n_levels"] == 2
    assert payload["r"] == 2.8
    assert len(payload["q"]) == 2
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["pipeline"] == "exponents"
    assert "exponents.json" in manifest["outputs"]


def test_noise_csv_is_byte_identical_on_replay(base_config, tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    assert cli("sample-noise", "--config", base_config, "--out", a)[0] == 0
    assert cli("sample-noise", "--config", base_config, "--out", b)[0] == 0
    assert (a / "noise.csv").read_bytes() == (b / "noise.csv").read_bytes()


def test_seed_flag_overrides_config_and_changes_paths(base_config, tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    assert cli("sample-noise", "--config", base_config, "--out", a)[0] == 0
    assert cli("sample-noise", "--config", base_config, "--out", b,
               "--seed", 5)[0] == 0
    assert (a / "noise.csv").read_bytes() != (b / "noise.csv").read_bytes()
    manifest = json.loads((b / "manifest.json").read_text())
    assert manifest["master_seed"] == 5


def test_negative_seed_rejected(base_config, tmp_path):
    code, _, err = cli("sample-noise", "--config", base_config,
                       "--out", tmp_path / "o", "--seed", -3)
    assert code == 2
    assert "seed" in err


def test_run_linear_outputs_and_manifest_hash(base_config, tmp_path):
    out = tmp_path / "lin"
    assert cli("run-linear", "--config", base_config, "--out", out)[0] == 0
    manifest = json.loads((out / "manifest.json").read_text())
    for name in ("noise.csv", "norms.csv", "blowup_profile.csv",
                 "snapshots.bin"):
        assert (out / name).is_file()
        assert name in manifest["outputs"]
    cfg = config_from_mapping(manifest["config"])
    assert config_hash(cfg) == manifest["config_sha256"]
    norms = read_csv_columns(out / "norms.csv")
    assert len(norms["time"]) == 65
    assert norms["l2"][0] == 0.0
    assert norms["l2"].max() > 0.0
    grid, times, snaps = read_snapshots(out / "snapshots.bin")
    assert snaps.shape == (65, grid.n_modes, grid.n_z, 2)
    assert np.allclose(times, norms["time"])
    profile = read_csv_columns(out / "blowup_profile.csv")
    assert len(profile["z"]) == 41
    # concentration at the driven wall: the profile peaks in the upper
    # quarter of the channel
    peak_z = profile["z"][np.argmax(profile["sup_lp_crit"])]
    assert peak_z > 0.75 * profile["z"].max()


def test_run_full_series_are_consistent(base_config, tmp_path):
    out = tmp_path / "full"
    assert cli("run-full", "--config", base_config, "--out", out)[0] == 0
    level_norms = read_csv_columns(out / "level_norms.csv")
    assert set(level_norms) == {"time", "level0_l2", "level1_l2"}
    norms = read_csv_columns(out / "norms.csv")
    assert norms["total_l2"][0] > 0.0, "standing-eddy initial condition"
    energy = read_csv_columns(out / "energy_residual.csv")
    assert energy["residual"][0] == 0.0
    assert np.all(energy["residual"] >= 0.0)
    tele = read_csv_columns(out / "telescoping.csv")
    assert tele["residual"].max() < 1e-10
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["n_levels"] == 2
    checks = manifest["checks"]
    assert [c["name"] for c in checks] == [
        "split forcings telescope to the assembled field",
        "time grid resolves the sampled mode cutoff",
    ]
    assert all(c["passed"] for c in checks)


def test_numerical_abort_exits_three_without_outputs(tmp_path):
    cfg = tmp_path / "abort.toml"
    cfg.write_text(
        "r = 2.8\nseed = 1\n"
        "[grid]\nn_x = 16\nn_z = 33\n"
        "[time]\nhorizon = 4.0\nn_steps = 8\n"
        "[noise]\nhurst = 0.9\nn_modes = 4\n"
        "[initial]\namplitude = 400.0\n"
    )
    out = tmp_path / "out"
    code, _, err = cli("run-full", "--config", cfg, "--out", out)
    assert code == 3
    assert "abort" in err.lower()
    assert not out.exists()


def test_manifest_config_replays_to_identical_noise(base_config, tmp_path):
    first = tmp_path / "first"
    assert cli("run-linear", "--config", base_config, "--out", first)[0] == 0
    manifest = json.loads((first / "manifest.json").read_text())
    replay_cfg = tmp_path / "replay.json"
    replay_cfg.write_text(json.dumps(manifest["config"]))
    second = tmp_path / "second"
    assert cli("run-linear", "--config", replay_cfg, "--out", second)[0] == 0
    for name in ("noise.csv", "norms.csv", "blowup_profile.csv"):
        assert (first / name).read_bytes() == (second / name).read_bytes()


def test_diagnostics_consumes_run_directory(base_config, tmp_path):
    src = tmp_path / "lin"
    assert cli("run-linear", "--config", base_config, "--out", src)[0] == 0
    code, stdout, _ = cli("diagnostics", src, "--threads", 2)
    assert code == 0
    out = src / "diagnostics"
    report = json.loads((out / "hurst_report.json").read_text())
    assert report["nominal_hurst"] == 0.9
    assert abs(report["variogram_hurst"] - 0.9) < 0.25
    table = read_csv_columns(out / "threshold_table.csv")
    assert list(table["q"]) == [1.05, 1.9]
    assert set(table["growing"]) <= {0.0, 1.0}
    decay = read_csv_columns(out / "interior_decay.csv")
    assert len(decay["time"]) > 0
    assert np.all(np.isfinite(decay["interior_rate"]))
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["pipeline"] == "diagnostics"
    assert manifest["source_run"] == str(src)
    assert {c["name"]: c["passed"] for c in manifest["checks"]} == {
        "modal increments recover the boundary Hurst exponent": True,
        "growth classification is monotone in the Lebesgue order": True,
    }


def test_diagnostics_requires_field_snapshots(tmp_path):
    cfg = tmp_path / "nofields.toml"
    cfg.write_text(BASE_TOML + "\n[output]\nfields = false\n")
    src = tmp_path / "lin"
    assert cli("run-linear", "--config", cfg, "--out", src)[0] == 0
    code, _, err = cli("diagnostics", src)
    assert code == 2
    assert "snapshots" in err


def test_python_run_api_uses_config_pipeline(base_config, tmp_path):
    cfg = tmp_path / "noise.toml"
    cfg.write_text("pipeline = 'sample-noise'\n" + BASE_TOML)
    out = run(cfg, out=tmp_path / "api")
    assert (out / "noise.csv").is_file()
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["pipeline"] == "sample-noise"
