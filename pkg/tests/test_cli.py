import json
import shutil
import subprocess

import pytest

from bohm_sg.cli import main

ENSEMBLE_CFG = """\
spin.sigma=0.5
model.n=25
ic.mode=equilibrium
ic.zhat0=sampled
ic.count=100
"""


@pytest.fixture
def ensemble_cfg(tmp_path):
    path = tmp_path / "ens.cfg"
    path.write_text(ENSEMBLE_CFG)
    return str(path)


def test_preset_list(capsys):
    assert main(["preset-list"]) == 0
    out = capsys.readouterr().out
    for fig in ("fig2", "fig6", "fig10", "fig9-uncoupled"):
        assert fig in out


def test_trajectories_preset_to_files(tmp_path):
    csv_path, svg_path = tmp_path / "f6.csv", tmp_path / "f6.svg"
    assert main(["trajectories", "--preset", "fig6", "--out-csv", str(csv_path), "--out-svg", str(svg_path)]) == 0
    lines = csv_path.read_text().splitlines()
    assert lines[0] == "run_id,t_prime,q,zhat1,zhat2"
    assert len(lines) == 1 + 41 * 101
    assert svg_path.read_text().count("<polyline") == 3 * 41


def test_trajectories_to_stdout(capsys, tmp_path):
    cfg = tmp_path / "one.cfg"
    cfg.write_text("ic.mode=fixed\nic.q0_values=0.3\nintegration.sample_interval=0.5\n")
    assert main(["trajectories", "--config", str(cfg)]) == 0
    out = capsys.readouterr().out.splitlines()
    assert out[0] == "run_id,t_prime,q,zhat1,zhat2" and len(out) == 4


def test_ensemble_json(capsys, ensemble_cfg):
    assert main(["ensemble", "--config", ensemble_cfg, "--runs", "200", "--seed", "4"]) == 0
    data = json.loads(capsys.readouterr().out)
    assert data["n_runs"] == 200 and data["seed"] == 4
    assert data["expected_fraction"] == 0.75


def test_seed_env_fallback(capsys, ensemble_cfg, monkeypatch):
    monkeypatch.setenv("BOHM_SEED", "4")
    main(["ensemble", "--config", ensemble_cfg, "--runs", "50"])
    from_env = capsys.readouterr().out
    main(["ensemble", "--config", ensemble_cfg, "--runs", "50", "--seed", "4"])
    assert capsys.readouterr().out == from_env
    main(["ensemble", "--config", ensemble_cfg, "--runs", "50", "--seed", "5"])
    assert capsys.readouterr().out != from_env


def test_runs_needs_equilibrium_mode(capsys, tmp_path):
    cfg = tmp_path / "grid.cfg"
    cfg.write_text("model.n=4\n")
    assert main(["ensemble", "--config", str(cfg), "--runs", "10"]) == 2
    assert "equilibrium" in capsys.readouterr().err


def test_verify_reduction_passes(capsys):
    assert main(["verify-reduction", "--n", "4", "--seed", "1"]) == 0
    assert "PASS" in capsys.readouterr().out


def test_verify_reduction_fails_above_tolerance(capsys):
    assert main(["verify-reduction", "--n", "4", "--seed", "1", "--tol", "1e-16"]) == 1
    assert "FAIL" in capsys.readouterr().out


def test_verify_reduction_rejects_large_n(capsys):
    assert main(["verify-reduction", "--n", "1001"]) == 2


@pytest.mark.parametrize(
    "text, needle",
    [("model.eta=-1\n", "eta"), ("model.colour=red\n", "line 1")],
)
def test_bad_config_exit_code(capsys, tmp_path, text, needle):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text(text)
    assert main(["trajectories", "--config", str(cfg)]) == 2
    assert needle in capsys.readouterr().err


def test_missing_config_file(capsys, tmp_path):
    assert main(["trajectories", "--config", str(tmp_path / "nope.cfg")]) == 2


def test_unknown_preset_is_usage_error():
    with pytest.raises(SystemExit):
        main(["trajectories", "--preset", "fig11"])


@pytest.mark.skipif(shutil.which("bohm-sg") is None, reason="console script not installed")
def test_console_script():
    res = subprocess.run(["bohm-sg", "preset-list"], capture_output=True, text=True, check=True)
    assert "fig6" in res.stdout
