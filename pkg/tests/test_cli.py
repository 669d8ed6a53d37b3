import csv
import hashlib
import json
from pathlib import Path

import pytest

from mpcr import IoError
from mpcr.cli import dispatch, parse_config_file, write_table
from mpcr.errors import ConfigError

CFG_SMALL = """
# two-type model, desk scale
v = 0.9, 0.2
z0 = 1, 1
kappa = 8
seed = 42
replicates = 6
"""


@pytest.fixture
def cfg_file(tmp_path):
    path = tmp_path / "run.cfg"
    path.write_text(CFG_SMALL)
    return path


def _digest(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def _read_csv(path: Path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def test_parse_config_file(cfg_file):
    values = parse_config_file(str(cfg_file))
    assert values == {
        "v": [0.9, 0.2],
        "z0": [1, 1],
        "kappa": 8,
        "seed": 42,
        "replicates": 6,
    }


def test_parse_config_rejects_unknown_key(tmp_path):
    path = tmp_path / "bad.cfg"
    path.write_text("vmax = 3\n")
    with pytest.raises(ConfigError):
        parse_config_file(str(path))


def test_parse_config_rejects_bad_value(tmp_path):
    path = tmp_path / "bad.cfg"
    path.write_text("kappa = southern\n")
    with pytest.raises(ConfigError):
        parse_config_file(str(path))


def test_missing_config_file_exit_code(tmp_path, capsys):
    rc = dispatch(["theorem1", "--config", str(tmp_path / "nope.cfg")])
    assert rc == 2
    assert "config error" in capsys.readouterr().err


def test_write_table_empty_rejected(tmp_path):
    target = tmp_path / "t.csv"
    with pytest.raises(IoError):
        write_table([], target, "csv")
    assert not target.exists()


def test_write_table_single_row(tmp_path):
    target = tmp_path / "t.csv"
    write_table([{"a": 1, "b": 0.5}], target, "csv")
    assert target.read_text() == "a,b\n1,0.5\n"


def test_write_table_deterministic(tmp_path):
    rows = [{"x": 0.1 * i, "i": i} for i in range(20)]
    p1, p2 = tmp_path / "a.csv", tmp_path / "b.csv"
    write_table(rows, p1, "csv")
    write_table(rows, p2, "csv")
    assert _digest(p1) == _digest(p2)


def test_write_table_json(tmp_path):
    target = tmp_path / "t.json"
    write_table([{"a": 1, "b": 0.5}], target, "json")
    assert json.loads(target.read_text()) == [{"a": 1, "b": 0.5}]


def test_maps_H_prints_value_and_certificate(capsys):
    rc = dispatch(["maps", "--H", "0.05", "--v1", "0.9", "--tol", "1e-10",
                   "--out", "/tmp/mpcr_maps_test"])
    assert rc == 0
    out = capsys.readouterr().out
    line = [l for l in out.splitlines() if l.startswith("H(")][0]
    value = float(line.split("=")[1].split()[0])
    cert = float(line.split("certificate =")[1].split()[0])
    assert 0.0475 <= value <= 0.05
    assert cert <= 1e-10


def test_maps_requires_a_point(capsys):
    rc = dispatch(["maps", "--v1", "0.9"])
    assert rc == 2


def test_maps_vector_ops(tmp_path, capsys):
    rc = dispatch([
        "maps", "--v", "0.9,0.2", "--F", "1,1", "--Finv", "1.3,1.0666666666666667",
        "--G", "2.0", "--out", str(tmp_path),
    ])
    assert rc == 0
    out = capsys.readouterr().out
    assert "F((1.0, 1.0))" in out
    assert "G_1(2.0)" in out and "G_2(2.0)" in out


def test_theorem1_run_writes_table_and_manifest(cfg_file, tmp_path):
    out = tmp_path / "results"
    rc = dispatch(["theorem1", "--config", str(cfg_file), "--out", str(out)])
    assert rc == 0
    rows = _read_csv(out / "theorem1.csv")
    assert len(rows) == 6
    assert list(rows[0]) == [
        "replicate",
        "scaled_Z_1", "W_hat_1", "limit_1",
        "scaled_Z_2", "W_hat_2", "limit_2",
    ]
    manifest = json.loads((out / "theorem1_manifest.json").read_text())
    assert manifest["config"]["model"]["kappa"] == 8
    assert manifest["config"]["model"]["seed"] == 42
    assert manifest["outputs"] == ["theorem1.csv"]
    assert "artifact_version" in manifest


def test_flag_overrides_config(cfg_file, tmp_path):
    out = tmp_path / "r2"
    rc = dispatch([
        "theorem1", "--config", str(cfg_file), "--replicates", "3",
        "--out", str(out),
    ])
    assert rc == 0
    assert len(_read_csv(out / "theorem1.csv")) == 3


def test_env_out_overrides_flag(cfg_file, tmp_path, monkeypatch):
    env_dir = tmp_path / "env_out"
    monkeypatch.setenv("MPCR_OUT", str(env_dir))
    rc = dispatch(["theorem1", "--config", str(cfg_file), "--out", str(tmp_path / "flag_out")])
    assert rc == 0
    assert (env_dir / "theorem1.csv").exists()
    assert not (tmp_path / "flag_out").exists()


def test_theorem2_steps_mismatch_exit_code(cfg_file, tmp_path, capsys):
    rc = dispatch([
        "theorem2", "--config", str(cfg_file), "--n-offset", "-3",
        "--steps", "9", "--out", str(tmp_path / "x"),
    ])
    assert rc == 2
    assert "steps" in capsys.readouterr().err


def test_theorem2_runs(cfg_file, tmp_path):
    out = tmp_path / "t2"
    rc = dispatch([
        "theorem2", "--config", str(cfg_file), "--n-offset", "-2",
        "--out", str(out),
    ])
    assert rc == 0
    rows = _read_csv(out / "theorem2.csv")
    assert len(rows) == 6
    assert list(rows[0])[:3] == ["replicate", "X_total", "thm2_total"]


def test_sweep_runs(cfg_file, tmp_path):
    out = tmp_path / "sw"
    rc = dispatch([
        "sweep", "--config", str(cfg_file), "--kappa-list", "6,8",
        "--replicates", "4", "--out", str(out),
    ])
    assert rc == 0
    rows = _read_csv(out / "sweep.csv")
    assert [r["kappa"] for r in rows] == ["6", "8"]


def test_figure_A_runs(tmp_path):
    out = tmp_path / "figA"
    rc = dispatch(["figure", "--id", "A", "--out", str(out), "--format", "csv"])
    assert rc == 0
    rows = _read_csv(out / "figureA.csv")
    assert rows[0]["x"] == "0.0"
    assert all(rows[0][f"G_{i}"] == "1.0" for i in range(1, 9))


def test_figure_needs_id(tmp_path, capsys):
    rc = dispatch(["figure", "--out", str(tmp_path)])
    assert rc == 2


def test_numerical_error_exit_code(tmp_path, capsys):
    # kappa so large the projected population overflows the validated range
    rc = dispatch([
        "simulate", "--v", "0.9", "--z0", "1", "--kappa", "150",
        "--out", str(tmp_path / "ov"),
    ])
    assert rc == 3
    assert "numerical error" in capsys.readouterr().err


def test_simulate_coupled_columns(cfg_file, tmp_path):
    out = tmp_path / "sim"
    cfg = tmp_path / "sim.cfg"
    cfg.write_text(CFG_SMALL + "mode = coupled\nsteps = 5\nreplicates = 2\n")
    rc = dispatch(["simulate", "--config", str(cfg), "--out", str(out)])
    assert rc == 0
    rows = _read_csv(out / "simulate.csv")
    assert len(rows) == 2 * 6  # two replicates, states 0..5
    assert list(rows[0]) == ["replicate", "n", "z_1", "z_2", "y_1", "y_2"]
    for row in rows:
        assert int(row["z_1"]) <= int(row["y_1"])
        assert int(row["z_2"]) <= int(row["y_2"])


def test_reruns_byte_identical(cfg_file, tmp_path):
    out = tmp_path / "rerun"
    argv = ["theorem1", "--config", str(cfg_file), "--out", str(out)]
    assert dispatch(argv) == 0
    first = {p.name: _digest(p) for p in out.iterdir()}
    assert dispatch(argv) == 0
    second = {p.name: _digest(p) for p in out.iterdir()}
    assert first == second
    # the data table is byte-identical regardless of the output directory
    other = tmp_path / "elsewhere"
    assert dispatch(["theorem1", "--config", str(cfg_file), "--out", str(other)]) == 0
    assert _digest(other / "theorem1.csv") == first["theorem1.csv"]


def test_json_format(cfg_file, tmp_path):
    out = tmp_path / "json_run"
    rc = dispatch([
        "theorem1", "--config", str(cfg_file), "--format", "json",
        "--out", str(out),
    ])
    assert rc == 0
    rows = json.loads((out / "theorem1.json").read_text())
    assert len(rows) == 6 and rows[0]["replicate"] == 0
