import json

import pytest

from toricdyn.cli import main


def test_ground_state_command(capsys):
    assert main(["ground-state", "--lx", "2", "--ly", "2", "--beta", "0.4"]) == 0
    info = json.loads(capsys.readouterr().out)
    assert info["n_spins"] == 8
    assert info["oracle_fidelity"] > 1 - 1e-10
    assert abs(info["norm"] - 1.0) < 1e-12


def test_quench_scan_with_config(tmp_path, capsys):
    cfg = {
        "lattice": {"lx": 2, "ly": 2},
        "beta0": {"min": 0.1, "max": 0.3, "step": 0.1},
        "time": {"ti": 0.0, "tf": 2.0, "dt": 0.01},
        "output": str(tmp_path / "scan.csv"),
    }
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps(cfg))
    assert main(["quench-scan", "--config", str(path)]) == 0
    summary = json.loads(capsys.readouterr().out)
    assert summary["points"] == 3 and summary["failures"] == 0
    assert (tmp_path / "scan.csv").exists()
    assert (tmp_path / "scan.csv.meta.json").exists()


def test_flag_overrides(tmp_path, capsys):
    assert main(["quench-scan", "--lx", "2", "--ly", "2", "--beta0-min", "0.2",
                 "--beta0-max", "0.2", "--tf", "1.0",
                 "--output", str(tmp_path / "o.csv")]) == 0
    summary = json.loads(capsys.readouterr().out)
    assert summary["points"] == 1


def test_lindblad_scan(tmp_path, capsys):
    assert main(["lindblad-scan", "--lx", "2", "--ly", "2", "--beta0-min", "0.3",
                 "--beta0-max", "0.3", "--tf", "0.2", "--dt", "0.1",
                 "--bath-k", "0.05", "--bath-ratio", "10",
                 "--output", str(tmp_path / "l.csv")]) == 0
    summary = json.loads(capsys.readouterr().out)
    assert summary["pipeline"] == "open"
    assert (tmp_path / "l.csv").exists()


def test_config_error_exit_code(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"pipeline": "nonsense"}))
    assert main(["quench-scan", "--config", str(bad)]) == 2
    # empty time grid
    assert main(["quench-scan", "--lx", "2", "--ly", "2", "--tf", "0.0"]) == 2


def test_resource_guard_exit_code():
    assert main(["quench-scan", "--lx", "10", "--ly", "10"]) == 3


def test_ground_state_rejects_bad_beta():
    assert main(["ground-state", "--lx", "2", "--ly", "2", "--beta", "-1.0"]) == 2
