import json
import subprocess
import sys

import pytest

from annular_cumulants.cli import main
from annular_cumulants.matrix_cumulants import HaarConjugatedModel


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_enumerate_annular_single_points(capsys):
    code, out, _ = run(capsys, "enumerate", "--family", "ann", "--p", "1", "--q", "1")
    assert code == 0
    assert json.loads(out) == ["(1,2)"]


def test_enumerate_counts_and_csv(capsys):
    code, out, _ = run(capsys, "enumerate", "--family", "nc", "--p", "4")
    assert code == 0 and len(json.loads(out)) == 14
    code, out, _ = run(capsys, "enumerate", "--family", "ps-prime", "--p", "1", "--q", "2", "--format", "csv")
    assert code == 0 and len(out.strip().splitlines()) > 0


def test_enumerate_usage_error(capsys):
    code, _, err = run(capsys, "enumerate", "--family", "ann", "--p", "1")
    assert code == 2 and "--q" in err


def test_size_bound_is_usage_error(capsys):
    code, _, err = run(capsys, "enumerate", "--family", "ann", "--p", "8", "--q", "8")
    assert code == 2 and "error" in err


def test_unknown_flag_rejected(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["gamma", "--u", "[[1]]", "--v", "[[1]]", "--bogus", "1"])
    assert exc.value.code == 2


def test_gamma_coefficient(capsys):
    code, out, _ = run(capsys, "gamma", "--u", "[[1,2,3],[4]]", "--v", "[[1,2,3,4]]")
    assert code == 0 and json.loads(out) == "30"
    code, out, _ = run(capsys, "gamma", "--u", "[[1,2]]", "--v", "[[1,2]]", "--float")
    assert json.loads(out) == -1.0


def test_gamma_rejects_non_refinement(capsys):
    code, _, err = run(capsys, "gamma", "--u", "[[1,2],[3]]", "--v", "[[1,3],[2]]")
    assert code == 2 and "--u" in err


def test_mobius_pair_with_note(capsys):
    code, out, _ = run(capsys, "mobius", "--p", "1", "--q", "1", "--pair", "0", "1")
    assert code == 0
    data = json.loads(out)
    assert data["mobius"] == "0"
    assert data["closed_form"] == "1"
    assert "note" in data


def test_mobius_table(capsys):
    code, out, _ = run(capsys, "mobius", "--p", "1", "--q", "2")
    assert code == 0
    assert isinstance(json.loads(out), dict)


def test_weingarten_values(capsys):
    code, out, _ = run(capsys, "weingarten", "--n", "2", "--dim", "5", "--coset-type", "2")
    assert code == 0
    assert json.loads(out)["value"] == "-1/140"
    code, out, _ = run(capsys, "weingarten", "--n", "2", "--dim", "5")
    assert json.loads(out)["values"]["1,1"] == "3/70"


def test_weingarten_singular_dimension(capsys):
    code, _, err = run(capsys, "weingarten", "--n", "3", "--dim", "2")
    assert code == 2 and "N=2" in err


def test_transform_round_trip(capsys, tmp_path):
    moments = {
        "alpha1": {"a": "1/2", "b": "2", "a b": "3", "a b^t": "-1"},
        "alpha2": {"a|b": "5/3"},
    }
    src = tmp_path / "m.json"
    src.write_text(json.dumps(moments))
    mid = tmp_path / "k.json"
    back = tmp_path / "back.json"
    assert main(["transform", "--dir", "m2c", "--input", str(src), "--out", str(mid)]) == 0
    cumulants = json.loads(mid.read_text())
    assert cumulants["kappa1"]["a b"] == "2"
    assert main(["transform", "--dir", "c2m", "--input", str(mid), "--out", str(back)]) == 0
    assert json.loads(back.read_text()) == moments


def test_transform_missing_moment(capsys, tmp_path):
    src = tmp_path / "m.json"
    src.write_text(json.dumps({"alpha1": {"a b": "1"}, "alpha2": {}}))
    code, _, err = run(capsys, "transform", "--dir", "m2c", "--order", "1", "--input", str(src))
    assert code == 1 and "missing" in err


def test_transform_bad_input(capsys, tmp_path):
    code, _, err = run(capsys, "transform", "--dir", "m2c", "--input", str(tmp_path / "none.json"))
    assert code == 2 and "--input" in err


def test_premap_operations(capsys):
    code, out, _ = run(capsys, "premap", "--op", "validate", "--pi", "(1,2)(-2,-1)")
    assert code == 0 and json.loads(out)["valid"]
    code, out, _ = run(capsys, "premap", "--op", "validate", "--pi", "(1,-1)(2)(-2)")
    assert code == 1 and not json.loads(out)["valid"]
    code, out, _ = run(capsys, "premap", "--op", "chi", "--pi", "(1,2)", "--p", "2")
    assert code == 0 and json.loads(out)["chi"] == 2
    code, out, _ = run(capsys, "premap", "--op", "trisect", "--pi", "(1,-2)", "--p", "1", "--q", "1")
    assert code == 0 and "family" in json.loads(out)


def fixture(tmp_path, conjugated):
    model = HaarConjugatedModel(
        {1: [[2, 1], [0, 1]], 2: [[2, 1], [1, -1]], 3: [[0, 1], [-1, 3]], 4: [[1, -1], [2, 1]]},
        conjugated,
        8,
    )
    path = tmp_path / "model.json"
    path.write_text(json.dumps(model.to_json()))
    return path


def test_vertex_mixed_cumulant_is_zero(capsys, tmp_path):
    path = fixture(tmp_path, {1: False, 2: True, 3: False, 4: True})
    code, out, _ = run(capsys, "vertex", "--model", str(path), "--pi", "(1,2)(3,4)", "--dim", "8")
    assert code == 0 and json.loads(out)["K"] == "0"


def test_vertex_dimension_guard(capsys, tmp_path):
    path = fixture(tmp_path, {k: True for k in range(1, 5)})
    code, _, err = run(capsys, "vertex", "--model", str(path), "--pi", "(1,2)(3,4)", "--dim", "4")
    assert code == 2


def test_sweep_report(capsys, tmp_path):
    path = fixture(tmp_path, {k: True for k in range(1, 5)})
    report = tmp_path / "sweep.json"
    code = main(["sweep", "--model", str(path), "--dims", "8,16,32", "--sizes", "1,1", "--limit", "1,1", "--report", str(report)])
    assert code == 0
    data = json.loads(report.read_text())
    assert data["ok"] and data["two_vertex_limits"][0]["expected"] == "-5/2"


def test_sweep_failure_exit_code(capsys, tmp_path):
    path = fixture(tmp_path, {k: True for k in range(1, 5)})
    code, out, _ = run(capsys, "sweep", "--model", str(path), "--dims", "8,16", "--sizes", "2,1")
    assert code == 1 and json.loads(out)["ok"] is False


def test_simulate_and_golden(capsys, tmp_path):
    out_path = tmp_path / "sim.json"
    args = ["simulate", "--battery", "deterministic", "--samples", "200", "--seed", "1"]
    assert main(args + ["--out", str(out_path)]) == 0
    report = json.loads(out_path.read_text())
    assert report["ok"] and report["max_abs_z"] == 0.0
    code, _, _ = run(capsys, *args, "--golden", str(out_path))
    assert code == 0
    out_path.write_text("{}\n")
    code, _, err = run(capsys, *args, "--golden", str(out_path))
    assert code == 1 and "differs" in err


def test_simulate_reproducible_across_jobs(capsys, tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    base = ["simulate", "--battery", "haar-basic", "--samples", "3000", "--seed", "2"]
    assert main(base + ["--out", str(a)]) == 0
    assert main(base + ["--jobs", "3", "--out", str(b)]) == 0
    assert a.read_text() == b.read_text()


def test_bad_jobs(capsys):
    code, _, err = run(capsys, "gamma", "--u", "[[1]]", "--v", "[[1]]", "--jobs", "0")
    assert code == 2 and "--jobs" in err


def test_module_entry_point():
    proc = subprocess.run(
        [sys.executable, "-m", "annular_cumulants", "enumerate", "--family", "ann", "--p", "1", "--q", "1"],
        capture_output=True,
        text=True,
    )
    assert proc.returncode == 0 and json.loads(proc.stdout) == ["(1,2)"]
