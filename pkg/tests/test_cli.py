import json
import os
from pathlib import Path

import pytest

from eqindex.cli import main

DATA = Path(__file__).parent.parent / "src" / "eqindex" / "data"
SINX = str(DATA / "sinx.json")
CUBIC = str(DATA / "cubic.json")
TWOMODE = str(DATA / "twomode.json")


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_spectrum_diagonal(capsys):
    code, out, _ = run(capsys, "spectrum", "--spec", SINX, "--lambda", "1.0")
    assert code == 0
    doc = json.loads(out)
    assert doc["schema"] == 1
    N = 16
    expected = sorted([n * n - 1.0 for n in range(N + 1)]
                      + [n * n - 1.0 for n in range(1, N + 1)])
    assert doc["eigenvalues"] == expected
    assert doc["split"]["m1"] == 1 and doc["split"]["m2"] == 2
    assert "config" in doc


def test_reduce_report(capsys):
    code, out, _ = run(capsys, "reduce", "--spec", SINX, "--k", "1")
    assert code == 0
    doc = json.loads(out)
    assert doc["m1"] == 1 and doc["m2"] == 2
    assert doc["residual_order"]["slope"] >= 2.9
    assert doc["definiteness"][0]["definite"] is True
    assert "sin3" in doc["v_coefficients"]["v1"]


def test_index_planar_both_methods(capsys, tmp_path):
    code, out, _ = run(capsys, "index", "--spec", SINX, "--k", "1",
                       "--lambda", "1.03", "--r-in", "0.01", "--r-out", "0.3",
                       "--method", "both", "--out", str(tmp_path))
    assert code == 0
    doc = json.loads(out)
    assert doc["planar"] and doc["index"] == -1
    assert (tmp_path / "index.json").exists()


def test_index_full_space(capsys):
    code, out, _ = run(capsys, "index", "--spec", SINX, "--lambda", "0.5",
                       "--radius", "0.05")
    assert code == 0
    assert json.loads(out)["index"] == -1


def test_index_winding_requires_planar(capsys):
    code, _, err = run(capsys, "index", "--spec", SINX, "--lambda", "0.5",
                       "--method", "winding")
    assert code == 1
    assert "planar" in err


def test_conley_flux_csv(capsys, tmp_path):
    code, out, _ = run(capsys, "conley", "--spec", SINX, "--k", "1",
                       "--out", str(tmp_path))
    assert code == 0
    doc = json.loads(out)
    assert doc["chi"] == 0 and doc["classification"] == "neither"
    lines = (tmp_path / "conley_flux.csv").read_text().splitlines()
    assert lines[0] == "theta,flux"
    assert len(lines) > 500


def test_bifurcate_sinx(capsys):
    code, out, _ = run(capsys, "bifurcate", "--spec", SINX, "--k", "1")
    assert code == 0
    doc = json.loads(out)
    assert doc["m1"] == 1 and doc["m2"] == 2 and doc["chi"] == 0
    assert doc["classification"] == "global_static_bifurcation"
    assert doc["K_index_left"] == 1 and doc["K_index_right"] == 1


def test_bifurcate_cubic(capsys):
    code, out, _ = run(capsys, "bifurcate", "--spec", CUBIC, "--k", "1")
    assert code == 0
    doc = json.loads(out)
    assert doc["classification"] == "attractor_repeller_bifurcation"
    assert doc["K_index_right"] == 0
    assert doc["details"]["invariant_circle"]["found"]


def test_verify_cubic_passes(capsys):
    code, out, _ = run(capsys, "verify", "--spec", CUBIC, "--k", "1")
    assert code == 0
    assert "FAIL" not in out
    doc = json.loads(out[out.index("{"):])
    assert all(c["pass"] for c in doc["checks"])


def test_branch_csv_and_determinism(capsys, tmp_path):
    out1, out2 = tmp_path / "r1", tmp_path / "r2"
    for out_dir in (out1, out2):
        code, _, _ = run(capsys, "branch", "--spec", TWOMODE, "--k", "1",
                         "--seed", "7", "--out", str(out_dir))
        assert code == 0
    names = sorted(os.listdir(out1))
    assert names == sorted(os.listdir(out2))
    assert any(n.startswith("branch_") and n.endswith(".csv") for n in names)
    for name in names:
        assert (out1 / name).read_bytes() == (out2 / name).read_bytes()
    doc = json.loads((out1 / "branch.json").read_text())
    terms = {b["termination"] for b in doc["branches"]}
    assert "trivial_reconnect" in terms
    header = (out1 / "branch_0.csv").read_text().splitlines()[0]
    assert header.startswith("arclength,lambda,norm_u,coef_const,coef_sin1")
    assert header.endswith("stability")


def test_missing_spec_file_is_validation_error(capsys):
    code, _, err = run(capsys, "spectrum", "--spec", "/nonexistent.json",
                       "--lambda", "1.0")
    assert code == 1


def test_bad_spec_file_is_validation_error(capsys, tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text('{"N": "x"}', encoding="utf-8")
    code, _, err = run(capsys, "spectrum", "--spec", str(bad), "--lambda", "1")
    assert code == 1
    assert "error" in err


def test_seed_override_changes_config_echo(capsys):
    code, out, _ = run(capsys, "spectrum", "--spec", CUBIC, "--lambda", "0.5",
                       "--seed", "42")
    assert code == 0
    assert json.loads(out)["config"]["seed"] == 42
