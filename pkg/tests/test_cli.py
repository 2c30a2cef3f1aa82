"""Command-line interface: subcommands, exit codes, reproducible outputs."""

import json

import numpy as np
import pytest

import dcmin.cli as cli
from dcmin.bench import DatasetSpec, gen_matrix
from dcmin.linalg import read_matrix, write_matrix
from dcmin.solvers import NumericalError


def run_main(capsys, argv):
    code = cli.main(argv)
    out = capsys.readouterr().out
    return code, out


# ------------------------------------------------------------------- gen

def test_gen_writes_matrix(tmp_path, capsys):
    path = tmp_path / "G.txt"
    code, _ = run_main(capsys, ["gen", "--kind", "randn", "--m", "6",
                                "--n", "4", "--seed", "3", "-o", str(path)])
    assert code == 0
    M = read_matrix(path)
    np.testing.assert_array_equal(
        M, gen_matrix(DatasetSpec(kind="randn", m=6, n=4, seed=3)))


def test_gen_byte_identical_rerun(tmp_path, capsys):
    p1, p2 = tmp_path / "a.txt", tmp_path / "b.txt"
    args = ["gen", "--kind", "sparse_synth", "--m", "40", "--n", "30",
            "--contaminate", "--seed", "5"]
    assert run_main(capsys, args + ["-o", str(p1)])[0] == 0
    assert run_main(capsys, args + ["-o", str(p2)])[0] == 0
    assert p1.read_bytes() == p2.read_bytes()


# ----------------------------------------------------------------- solve

def test_solve_emits_json_and_trace(tmp_path, capsys):
    trace_path = tmp_path / "trace.csv"
    code, out = run_main(capsys, [
        "solve", "--app", "sparse", "--solver", "cd-snca",
        "--m", "24", "--n", "16", "--seed", "2", "--max-epochs", "30",
        "-o", str(trace_path)])
    assert code == 0
    doc = json.loads(out)
    assert doc["application"] == "sparse"
    assert doc["solver"] == "cd-snca"
    assert np.isfinite(doc["final_F"])
    assert doc["stop_reason"] in ("converged", "time", "max_epochs")
    lines = trace_path.read_text().splitlines()
    assert lines[0] == "iter,epoch,F"


def test_solve_trace_byte_identical_rerun(tmp_path, capsys):
    args = ["solve", "--app", "binary", "--solver", "cd-snca", "--m", "24",
            "--n", "16", "--seed", "4", "--max-epochs", "50", "--rule", "random"]
    p1, p2 = tmp_path / "t1.csv", tmp_path / "t2.csv"
    _, out1 = run_main(capsys, args + ["-o", str(p1)])
    _, out2 = run_main(capsys, args + ["-o", str(p2)])
    assert out1 == out2
    assert p1.read_bytes() == p2.read_bytes()


def test_solve_accepts_matrix_files(tmp_path, capsys):
    rng = np.random.default_rng(8)
    G = rng.standard_normal((10, 6))
    y = np.abs(rng.standard_normal(10))
    gp, yp = tmp_path / "G.txt", tmp_path / "y.txt"
    write_matrix(gp, G)
    write_matrix(yp, y.reshape(-1, 1))
    code, out = run_main(capsys, [
        "solve", "--app", "glr", "--solver", "cd-snca",
        "--G", str(gp), "--y", str(yp), "--max-epochs", "30"])
    assert code == 0
    assert np.isfinite(json.loads(out)["final_F"])


def test_solve_numerical_failure_exit_code(tmp_path, capsys, monkeypatch):
    def boom(problem, solver, config, x0=None):
        raise NumericalError("synthetic failure")
    monkeypatch.setattr(cli, "run_solver", boom)
    code = cli.main(["solve", "--app", "sparse", "--solver", "cd-snca",
                     "--m", "8", "--n", "6"])
    assert code == 3
    assert "numerical failure" in capsys.readouterr().err


# ----------------------------------------------------------------- bench

def test_bench_runs_spec(tmp_path, capsys):
    spec = {
        "application": "sparse",
        "datasets": [{"kind": "randn", "m": 24, "n": 16, "seed": 1}],
        "solvers": ["cd-snca", "pdca"],
        "repeats": 2,
        "config": {"max_epochs": 20, "time_budget_s": 5.0},
    }
    spec_path = tmp_path / "spec.json"
    spec_path.write_text(json.dumps(spec))
    out1, out2 = tmp_path / "r1", tmp_path / "r2"
    assert run_main(capsys, ["bench", "--spec", str(spec_path), "-o", str(out1)])[0] == 0
    assert run_main(capsys, ["bench", "--spec", str(spec_path), "-o", str(out2)])[0] == 0
    rows = json.loads((out1 / "report.json").read_text())
    assert {r["solver"] for r in rows} == {"cd-snca", "pdca"}
    assert (out1 / "report.json").read_bytes() == (out2 / "report.json").read_bytes()
    assert (out1 / "report.csv").read_bytes() == (out2 / "report.csv").read_bytes()


# -------------------------------------------------------------- classify

def test_classify_problem59(tmp_path, capsys):
    point = tmp_path / "x.txt"
    write_matrix(point, np.array([[-2.25], [-4.0], [-5.0]]))
    out_path = tmp_path / "report.json"
    code, _ = run_main(capsys, ["classify", "--app", "problem59",
                                "--point", str(point), "-o", str(out_path)])
    assert code == 0
    doc = json.loads(out_path.read_text())
    assert doc["F_value"] == pytest.approx(-18.625, abs=1e-9)
    assert doc["is_cws"] is True
    assert doc["cws_residual"] <= 1e-9


def test_classify_pca_requires_C(tmp_path, capsys):
    point = tmp_path / "x.txt"
    write_matrix(point, np.ones((3, 1)))
    with pytest.raises(SystemExit):
        cli.main(["classify", "--app", "pca", "--point", str(point)])
    C = tmp_path / "C.txt"
    write_matrix(C, np.diag([4.0, 1.0, 0.5]))
    x = tmp_path / "opt.txt"
    write_matrix(x, np.array([[2.0], [0.0], [0.0]]))  # sqrt(4) * e_1
    code, out = run_main(capsys, ["classify", "--app", "pca",
                                  "--point", str(x), "--C", str(C)])
    assert code == 0
    assert json.loads(out)["is_cws"] is True


# ------------------------------------------------------------- enumerate

@pytest.mark.parametrize("problem,count", [("59", 27), ("61", 7), ("62", 8)])
def test_enumerate_counts(tmp_path, capsys, problem, count):
    code, out = run_main(capsys, ["enumerate", "--problem", problem])
    assert code == 0
    rows = json.loads(out)
    assert len(rows) == count
    assert all({"y_pattern", "x", "F", "critical", "cws"} <= set(r) for r in rows)


def test_enumerate_byte_identical_rerun(tmp_path, capsys):
    p1, p2 = tmp_path / "a.json", tmp_path / "b.json"
    assert cli.main(["enumerate", "--problem", "59", "-o", str(p1)]) == 0
    assert cli.main(["enumerate", "--problem", "59", "-o", str(p2)]) == 0
    assert p1.read_bytes() == p2.read_bytes()


# ------------------------------------------------------------- bad usage

def test_bad_arguments_exit_2():
    with pytest.raises(SystemExit) as exc:
        cli.main(["solve", "--app", "sudoku", "--solver", "cd-snca"])
    assert exc.value.code == 2
    with pytest.raises(SystemExit) as exc:
        cli.main(["enumerate", "--problem", "60"])
    assert exc.value.code == 2
    with pytest.raises(SystemExit) as exc:
        cli.main([])
    assert exc.value.code == 2
