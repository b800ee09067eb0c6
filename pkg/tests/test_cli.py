import json
from pathlib import Path

import pytest

from risuav.cli import main
from risuav.config import config_from_text, config_to_text, full_scale_scenario, save_config

from conftest import make_tiny


def tiny_config_file(tmp_path, **over):
    sc = make_tiny(ssca=make_tiny().ssca, **over)
    path = tmp_path / "scenario.cfg"
    save_config(sc, path)
    return path


def test_validate_ok(tmp_path, capsys):
    path = tiny_config_file(tmp_path)
    assert main(["validate", "--config", str(path)]) == 0
    assert "OK" in capsys.readouterr().out


def test_validate_bad_power_names_key(tmp_path, capsys):
    path = tiny_config_file(tmp_path)
    text = path.read_text().replace("P = 0.01", "P = -0.5")
    bad = tmp_path / "bad.cfg"
    bad.write_text(text)
    assert main(["validate", "--config", str(bad)]) == 1
    assert "P" in capsys.readouterr().err


def test_validate_missing_file_exit_1(tmp_path, capsys):
    assert main(["validate", "--config", str(tmp_path / "nope.cfg")]) == 1


def test_export_default_config_reports_full_scale(capsys):
    assert main(["export-default-config"]) == 0
    text = capsys.readouterr().out
    sc = config_from_text(text)
    assert sc.K == 4
    assert sc.M == 400
    assert sc.N_t == 5
    assert sc.I == 100
    assert sc.P == 0.01
    assert "sigma2_dbm = -80.0" in text
    assert "rho_db = -25.0" in text
    assert "v_max = 25.0" in text
    assert "z_F = 80.0" in text
    assert "q0 = -500.0,20.0" in text
    assert "qF = 500.0,20.0" in text


def test_export_roundtrip_byte_identical(tmp_path):
    out = tmp_path / "default.cfg"
    assert main(["export-default-config", "--out", str(out)]) == 0
    text = out.read_text()
    assert config_to_text(config_from_text(text)) == text


def test_sweep_writes_expected_rows(tmp_path):
    cfg = tiny_config_file(tmp_path, I=4)
    out = tmp_path / "out"
    rc = main(["sweep", "--config", str(cfg), "--param", "beta_db",
               "--values=-5,0,5,10", "--schemes", "random_phase",
               "--reps", "4", "--out-dir", str(out)])
    assert rc == 0
    lines = (out / "rates.csv").read_text().strip().splitlines()
    assert len(lines) == 1 + 4  # header + one row per sweep value
    assert all(line.startswith("random_phase,") for line in lines[1:])
    man = json.loads((out / "manifest.json").read_text())
    assert man["param"] == "beta_db"
    assert man["values"] == [-5.0, 0.0, 5.0, 10.0]


def test_sweep_bad_values_exit_1(tmp_path, capsys):
    cfg = tiny_config_file(tmp_path)
    assert main(["sweep", "--config", str(cfg), "--param", "beta_db",
                 "--values", "abc", "--out-dir", str(tmp_path / "x")]) == 1


def test_sweep_infeasible_cell_exit_2(tmp_path, capsys):
    cfg = tiny_config_file(tmp_path, I=4)
    rc = main(["sweep", "--config", str(cfg), "--param", "T_seconds",
               "--values", "2", "--schemes", "random_phase", "--reps", "4",
               "--out-dir", str(tmp_path / "x")])
    assert rc == 2
    assert "ERROR" in capsys.readouterr().out


def test_unknown_scheme_exit_1(tmp_path, capsys):
    cfg = tiny_config_file(tmp_path)
    assert main(["simulate", "--config", str(cfg), "--schemes", "nonsense",
                 "--out-dir", str(tmp_path / "y")]) == 1
    assert "unknown scheme" in capsys.readouterr().err


def test_benchmark_covers_every_scheme(tmp_path):
    cfg = tiny_config_file(tmp_path, I=3)
    out = tmp_path / "bench"
    rc = main(["benchmark", "--config", str(cfg), "--reps", "2",
               "--out-dir", str(out)])
    assert rc == 0
    lines = (out / "rates.csv").read_text().strip().splitlines()
    from risuav.pipeline import SCHEMES
    assert len(lines) == 1 + len(SCHEMES)
    assert {line.split(",")[0] for line in lines[1:]} == set(SCHEMES)


def test_identical_invocations_byte_identical_outputs(tmp_path):
    cfg = tiny_config_file(tmp_path, I=4)
    outs = []
    for name in ("r1", "r2"):
        out = tmp_path / name
        rc = main(["simulate", "--config", str(cfg), "--schemes", "random_phase",
                   "--reps", "3", "--out-dir", str(out)])
        assert rc == 0
        outs.append(out)
    a, b = outs
    assert (a / "rates.csv").read_bytes() == (b / "rates.csv").read_bytes()
    assert (a / "manifest.json").read_bytes() == (b / "manifest.json").read_bytes()
    for sub in a.iterdir():
        if sub.is_dir():
            for f in sub.iterdir():
                assert f.read_bytes() == (b / sub.name / f.name).read_bytes()
