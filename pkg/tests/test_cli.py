from __future__ import annotations

import csv
import json
import subprocess
import sys

import pytest

from chiral_index.cfs import build_shift_cfs
from chiral_index.cli import main


def run(*args, cwd=None):
    proc = subprocess.run(
        [sys.executable, "-m", "chiral_index", *map(str, args)], capture_output=True, text=True, cwd=cwd
    )
    return proc.returncode, proc.stdout, proc.stderr


def report(out):
    return json.loads((out / "report.json").read_text())


def config(tmp_path, doc, name="cfg.json"):
    path = tmp_path / name
    path.write_text(json.dumps(doc))
    return path


def test_shift_config(tmp_path):
    out = tmp_path / "o"
    code, stdout, _ = run("shift", "--config", config(tmp_path, {"scenario": "shift", "p": 1, "N": 200}), "--out", out)
    assert code == 0
    doc = report(out)
    assert doc["index"] == 1 and doc["scenario"] == "shift"
    assert doc["checks"]["pseudoscalar_valid"] is True
    assert doc["checks"]["splitting_deviation"] == 0.0
    assert "index 1" in stdout


def test_lifetime_pi_exits_two(tmp_path):
    out = tmp_path / "o"
    code, _, _ = run("lifetime", "--config", config(tmp_path, {"scenario": "lifetime", "T": "pi", "K": 50}), "--out", out)
    assert code == 2
    doc = report(out)
    assert doc["index"] is None and doc["census"] == {"K1": 50, "K2": 100}
    assert doc["parameters"]["T"] == "pi"


def test_torus_config(tmp_path):
    cfg = {"scenario": "torus", "p": 2, "K": 50, "conformal": {"poisson": {"r": 0.5}}}
    out = tmp_path / "o"
    code, _, _ = run("torus", "--config", config(tmp_path, cfg), "--out", out)
    assert code == 0 and report(out)["index"] == 2
    assert report(out)["kernel_labels_L"] == ["L-2", "L-1"]


def test_torus_flat_factor_exits_two(tmp_path):
    code, _, _ = run("torus", "--param", "p=1", "--param", 'conformal={"constant": {"value": 1}}',
                     "--truncation", 20, "--out", tmp_path)
    assert code == 2


def test_spiral_seed_and_reproducibility(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    for out in (a, b):
        code, _, _ = run("spiral", "--param", "p=1", "--seed", 3, "--csv", "--out", out)
        assert code == 0
    for name in ("report.json", "singular_values.csv", "S_L.csv"):
        assert (a / name).read_bytes() == (b / name).read_bytes()
    doc = report(a)
    assert doc["index"] == 1 and doc["parameters"]["seed"] == 3
    assert doc["mu"]["rigorous"] is True


def test_homotopy_sweep_csv(tmp_path):
    code, _, _ = run("conformal-homotopy", "--param", "path=lifetime", "--param", "steps=3",
                     "--param", "K=20", "--csv", "--out", tmp_path)
    assert code == 2
    rows = list(csv.reader((tmp_path / "sweep.csv").open()))
    assert len(rows) == 4 and rows[-1][1] == "undefined"
    assert report(tmp_path)["verdict"] == "undefined at step 2"


def test_conformal_homotopy_default(tmp_path):
    code, _, _ = run("conformal-homotopy", "--param", "K=16", "--out", tmp_path)
    assert code == 0
    assert report(tmp_path)["verdict"] == "constant"


def test_cfs_file(tmp_path):
    path = tmp_path / "sys.json"
    path.write_text(build_shift_cfs(2, 30).dumps())
    code, _, _ = run("cfs", "run", path, "--out", tmp_path / "o")
    assert code == 0
    doc = report(tmp_path / "o")
    assert doc["index"] == 2 and doc["scenario"] == "cfs-file"
    assert doc["checks"]["adjoint_deviation"] <= 1e-10


def test_negated_gamma(tmp_path):
    assert main(["shift", "--param", "p=2", "--param", "negate_gamma=true", "--out", str(tmp_path)]) == 0
    assert report(tmp_path)["index"] == -2


@pytest.mark.parametrize(
    "args,message",
    [
        (["shift", "--param", "p=1", "--param", "bogus=1"], "invalid parameters"),
        (["shift"], "invalid parameters"),
        (["shift", "--param", "p=0"], "invalid parameters"),
        (["lifetime", "--param", "T=banana"], "invalid parameters"),
        (["torus", "--param", "p=1", "--seed", "2"], "invalid parameters"),
        (["nonsense"], "usage"),
        (["cfs", "run", "/nonexistent/file.json"], "I/O"),
        (["spiral", "--param", "p=1", "--param", "amplitude=0.9", "--param", "decay=0.99"], "computation failed"),
    ],
)
def test_errors_exit_one_with_distinct_messages(tmp_path, capsys, args, message):
    assert main(args + ["--out", str(tmp_path)] if args[0] != "nonsense" else args) == 1
    assert message in capsys.readouterr().err


def test_config_for_other_scenario_rejected(tmp_path, capsys):
    cfg = config(tmp_path, {"scenario": "torus", "p": 1})
    assert main(["shift", "--config", str(cfg), "--out", str(tmp_path)]) == 1
    assert "scenario" in capsys.readouterr().err


def test_invalid_json_config(tmp_path, capsys):
    path = tmp_path / "bad.json"
    path.write_text("{not json")
    assert main(["shift", "--config", str(path), "--out", str(tmp_path)]) == 1
    assert "not valid JSON" in capsys.readouterr().err


def test_truncation_overrides(tmp_path):
    assert main(["lifetime", "--param", "T=1", "--truncation", "12", "--out", str(tmp_path)]) == 0
    assert report(tmp_path)["parameters"]["K"] == 12
