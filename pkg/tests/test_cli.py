import csv
import io
import subprocess
import sys

import numpy as np
import pytest

from diter.catalog import example
from diter.cli import main
from diter.mmio import write_matrix, write_vector
from diter.sim import CSV_HEADER


def rows(text):
    return list(csv.reader(io.StringIO(text)))


def test_examples(capsys):
    assert main(["examples"]) == 0
    out = capsys.readouterr().out
    for name in ("A1", "A2", "A3", "Aprime"):
        assert f"{name}:" in out


def test_solve_to_file(tmp_path, capsys):
    out = tmp_path / "s.csv"
    assert main(["solve", "--example", "A1", "--out", str(out)]) == 0
    table = rows(out.read_text())
    assert table[0] == ["updates", "method", "error", "r_total", "bound"]
    assert float(table[-1][2]) <= 1e-10
    assert "H = [0.153846153846154" in capsys.readouterr().out


def test_solve_from_files(tmp_path, capsys):
    a = example("A2")
    write_matrix(tmp_path / "a.mtx", a.matrix)
    write_vector(tmp_path / "b.txt", a.rhs)
    cfg = tmp_path / "run.cfg"
    cfg.write_text(f"input.matrix = {tmp_path / 'a.mtx'}\ninput.vector = {tmp_path / 'b.txt'}\nsolve.method = jacobi\n")
    assert main(["solve", "--config", str(cfg)]) == 0
    table = rows(capsys.readouterr().out)
    assert {r[1] for r in table[1:]} == {"jacobi"}
    # A2 has no contraction margin, so the bound column stays empty
    assert table[-1][4] == ""


def test_solve_not_converged(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("input.example = A3\nsolve.max_steps = 3\n")
    assert main(["solve", "--config", str(cfg)]) == 2


def test_simulate_csv_is_byte_stable(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("input.example = A3\nsim.variant = v2\nsim.workers = 2\nsim.latency = 0..4\nsim.seed = 3\n")
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert main(["simulate", "--config", str(cfg), "--out", str(a)]) == 0
    assert main(["simulate", "--config", str(cfg), "--out", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()
    table = rows(a.read_text())
    assert tuple(table[0]) == CSV_HEADER
    assert table[1][:3] == ["0", "0", "init"]


def test_simulate_with_update(tmp_path, capsys):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("input.example = A\nsim.workers = 2\nsim.update = 5:Aprime\n")
    assert main(["simulate", "--config", str(cfg)]) == 0
    table = rows(capsys.readouterr().out)
    assert any(r[2] == "switch" and r[0] == "5" for r in table[1:])


def test_simulate_not_converged(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("input.example = A1\nsim.max_time = 2\n")
    assert main(["simulate", "--config", str(cfg), "--out", str(tmp_path / "t.csv")]) == 2


def test_compare(capsys):
    assert main(["compare", "--example", "A1"]) == 0
    captured = capsys.readouterr()
    table = rows(captured.out)
    assert table[0] == ["example", "series", "axis", "x", "error"]
    assert {r[1] for r in table[1:]} == {"jacobi", "gauss-seidel", "d-iteration", "1pid", "2pid"}
    assert "speedup 2.000" in captured.err


@pytest.mark.parametrize(
    "argv",
    [["solve", "--example", "A9"], ["solve"], ["solve", "--config", "/nonexistent/run.cfg"]],
)
def test_errors_exit_one(argv):
    assert main(argv) == 1


@pytest.mark.parametrize("argv", [["bogus"], ["solve", "--tol", "tiny"]])
def test_usage_errors_exit_one(argv):
    with pytest.raises(SystemExit) as exc:
        main(argv)
    assert exc.value.code == 1


def test_bad_config_reports_line(tmp_path, capsys):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("input.example = A1\nsim.workers = x\n")
    assert main(["simulate", "--config", str(cfg)]) == 1
    assert "line 2" in capsys.readouterr().err


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "diter.cli", "examples"], capture_output=True, text=True)
    assert proc.returncode == 0 and "A1:" in proc.stdout
