import json

import numpy as np
import pytest

from edcrit.cli import main
from edcrit.tensors import DenseTensor


def _run(args, capsys):
    code = main(args)
    out = capsys.readouterr()
    return code, out.out, out.err


def test_critpoints_matrix_rank(tmp_path, capsys):
    out = str(tmp_path / "run")
    code, stdout, _ = _run(
        ["critpoints", "--variety", "matrix-rank", "--p", "3", "--q", "3",
         "--k", "1", "--query", "diag:3,2,1", "--seed", "7",
         "--output", out], capsys)
    assert code == 0
    artifact = json.loads((tmp_path / "run.json").read_text())
    assert artifact["schema_version"] == "1"
    assert artifact["config"]["seed"] == 7
    result = artifact["result"]
    assert result["delta_estimate"] == 3
    assert sum(1 for p in result["points"] if p["stratum"] == 0) == 3
    assert "delta_estimate=3" in stdout


def test_gf_example64(tmp_path, capsys):
    out = str(tmp_path / "gf")
    code, stdout, _ = _run(["gf", "example64", "--output", out], capsys)
    assert code == 0
    artifact = json.loads((tmp_path / "gf.json").read_text())
    assert artifact["result"] == {"rank": 2, "srank": 3}


def test_experiment_thm71_csv(tmp_path, capsys):
    out = str(tmp_path / "exp")
    code, _, _ = _run(
        ["experiment", "thm71", "--m", "2", "--d", "3", "--trials", "4",
         "--starts", "8", "--seed", "1", "--output", out], capsys)
    assert code == 0
    lines = (tmp_path / "exp.csv").read_text().strip().splitlines()
    assert len(lines) == 5  # header + one row per trial
    assert lines[0].startswith("trial,seed,objective,symmetric")
    summary = json.loads((tmp_path / "exp.json").read_text())["result"]
    assert summary["trials"] == 4


def test_determinism_byte_identical(tmp_path, capsys):
    a = str(tmp_path / "a")
    b = str(tmp_path / "b")
    args = ["experiment", "thm71", "--m", "2", "--d", "3", "--trials", "2",
            "--starts", "6", "--seed", "9"]
    assert _run(args + ["--output", a], capsys)[0] == 0
    assert _run(args + ["--output", b], capsys)[0] == 0
    assert (tmp_path / "a.json").read_bytes() == (tmp_path / "b.json").read_bytes()
    assert (tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes()


def test_config_error_exit_code(tmp_path, capsys):
    out = str(tmp_path / "bad")
    code, _, err = _run(
        ["critpoints", "--variety", "matrix-rank", "--query", "diag:1",
         "--output", out], capsys)
    assert code == 2
    assert "config error" in err
    code2, _, _ = _run(
        ["critpoints", "--variety", "diag-quadric", "--coeffs", "1,0",
         "--query", "diag:1,1", "--output", out], capsys)
    assert code2 == 2


def test_file_tensor_literal_and_approx(tmp_path, capsys):
    rng = np.random.default_rng(0)
    t = DenseTensor.from_array(rng.standard_normal((2, 2, 2)))
    path = tmp_path / "tensor.json"
    path.write_text(t.to_json())
    out = str(tmp_path / "apx")
    code, stdout, _ = _run(
        ["approx", "--tensor", f"file:{path}", "--k", "1", "--starts", "10",
         "--seed", "0", "--output", out], capsys)
    assert code == 0
    result = json.loads((tmp_path / "apx.json").read_text())["result"]
    assert len(result["terms"]) == 1
    assert "objective" in stdout


def test_kruskal_bundle(tmp_path, capsys):
    bundle = tmp_path / "bundle.json"
    eye = np.eye(2).tolist()
    bundle.write_text(json.dumps({"Y": eye, "Z": eye, "W": eye}))
    out = str(tmp_path / "kr")
    code, stdout, _ = _run(
        ["kruskal", "--bundle", str(bundle), "--output", out], capsys)
    assert code == 0
    result = json.loads((tmp_path / "kr.json").read_text())["result"]
    assert result["condition_met"] is True
    assert "certified" in stdout


def test_decomp_power_basis(tmp_path, capsys):
    out = str(tmp_path / "pb")
    code, _, _ = _run(
        ["decomp", "--mode", "power-basis", "--m", "2", "--d", "3",
         "--output", out], capsys)
    assert code == 0
    result = json.loads((tmp_path / "pb.json").read_text())["result"]
    assert len(result["vectors"]) == 4


def test_unknown_tensor_literal(tmp_path, capsys):
    out = str(tmp_path / "x")
    code, _, err = _run(
        ["approx", "--tensor", "nope:1,2", "--output", out], capsys)
    assert code == 2
    assert "unrecognized tensor literal" in err
