import json

import numpy as np
import pytest

from blockpick.cli import main
from blockpick.processes import ProcessModel, generate
from blockpick.series import save_csv

AR = {"kind": "ar1", "phi": 0.5, "sigma": 1.0}


@pytest.fixture
def series_file(tmp_path):
    path = tmp_path / "x.csv"
    save_csv(path, generate(ProcessModel.ar1(0.5), 600, 9))
    return path


@pytest.mark.parametrize("method", ["hhj", "nppi", "pw"])
def test_select(method, series_file, capsys):
    assert main(["select", "--method", method, "--input", str(series_file)]) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["method"] == method
    assert out["n"] == 600
    assert 1 <= out["block_length"] <= 200


def test_select_overrides(series_file, capsys):
    assert main(["select", "--method", "pw", "--input", str(series_file), "--M", "3"]) == 0
    assert json.loads(capsys.readouterr().out)["diagnostics"]["M"] == 3


def test_select_constant_series_is_degenerate(tmp_path, capsys):
    path = tmp_path / "c.csv"
    path.write_text("1.5\n" * 100)
    assert main(["select", "--method", "pw", "--input", str(path)]) == 3


def test_select_bad_input(tmp_path, capsys):
    path = tmp_path / "bad.csv"
    path.write_text("1.0\n2.0\nabc\n")
    assert main(["select", "--method", "pw", "--input", str(path)]) == 2
    assert "line 3" in capsys.readouterr().err


def test_bad_config_exit_code(tmp_path, capsys):
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps({"model": AR, "methods": ["pw"], "n_grid": [500, 100], "replications": 10}))
    assert main(["experiment", "--config", str(path), "--out-dir", str(tmp_path)]) == 2
    assert "n_grid" in capsys.readouterr().err


def test_mse_curve(series_file, tmp_path, capsys):
    assert main(["mse-curve", "--input", str(series_file), "--m", "27", "--K", "1.5"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == "b,mse"
    assert [int(l.split(",")[0]) for l in lines[1:]] == [2, 3, 4]
    out = tmp_path / "curve.csv"
    assert main(["mse-curve", "--input", str(series_file), "--kind", "oracle", "--sigma-inf-sq", "4",
                 "--output", str(out)]) == 0
    assert all(float(l.split(",")[1]) > 0 for l in out.read_text().splitlines()[1:])


def test_mse_curve_oracle_needs_center(series_file):
    assert main(["mse-curve", "--input", str(series_file), "--kind", "oracle"]) == 2


def test_oracle_command(tmp_path, capsys):
    args = ["oracle", "--model", json.dumps(AR), "--n", "200", "--R", "50", "--cache-dir", str(tmp_path)]
    assert main(args) == 0
    out = json.loads(capsys.readouterr().out)
    assert out[0]["n"] == 200 and out[0]["R"] == 50
    assert len(list(tmp_path.glob("oracle-200-*.json"))) == 1


def test_experiment_command(tmp_path, capsys):
    cfg = {"model": AR, "methods": ["pw", "hhj"], "n_grid": [200, 300, 400], "replications": 10,
           "oracle": {"R": 40, "cache_dir": str(tmp_path / "cache")}}
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps(cfg))
    out_dir = tmp_path / "out"
    assert main(["experiment", "--config", str(path), "--out-dir", str(out_dir), "--prefix", "run"]) == 0
    for suffix in (".csv", ".json", ".gp"):
        assert (out_dir / f"run{suffix}").exists()
    rows = (out_dir / "run.csv").read_text().splitlines()
    assert len(rows) == 1 + 2 * 3
