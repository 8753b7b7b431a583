import subprocess
import sys

import pytest

from eia.cli import build_parser, config_from_args, main
from eia.lemmas import Kind

LEADING = """(set-logic QF_EIA)
(declare-fun exp (Int Int) Int)
(declare-fun x () Int)
(declare-fun y () Int)
(assert (> (* x x) 4))
(assert (> (* y y) 4))
(assert (= (exp (exp x y) y) (exp x (exp y y))))
(check-sat)
"""

MODEL_EXAMPLE = """(declare-const x Int)(declare-const y Int)(declare-const z Int)
(assert (and (< 1 x) (< x y) (< 0 z) (< (exp x z) (exp y z))))
(check-sat)
(get-value (x (exp x z)))
"""


def run(tmp_path, text, *flags):
    path = tmp_path / "in.smt2"
    path.write_text(text)
    proc = subprocess.run([sys.executable, "-m", "eia.cli", str(path), *flags],
                          capture_output=True, text=True, timeout=120)
    return proc.returncode, proc.stdout.splitlines(), proc.stderr


def test_feature_flags_map_to_config():
    cfg = config_from_args(build_parser().parse_args(["--no-symmetry", "--no-rewriting", "f"]))
    assert not cfg.rewriting and cfg.constant_folding
    assert Kind.SYMMETRY not in cfg.lemma_kinds
    cfg = config_from_args(build_parser().parse_args(["--no-lemmas", "--timeout", "3"]))
    assert cfg.lemma_kinds == () and cfg.timeout == 3


def test_missing_file_is_input_error(capsys):
    assert main(["/no/such/file.smt2"]) == 3


def test_syntax_error_is_input_error(tmp_path):
    code, out, err = run(tmp_path, "(assert (> x")
    assert code == 3 and "error" in err


def test_bad_timeout_is_input_error(tmp_path):
    assert run(tmp_path, LEADING, "--timeout", "0")[0] == 3


def test_unknown_or_missing_backend(tmp_path):
    assert run(tmp_path, LEADING, "--solver", "yices")[0] == 4
    assert run(tmp_path, LEADING, "--solver", "cmd:/no/such/solver -in")[0] == 4


@pytest.mark.backend
def test_leading_unsat_with_stats_and_validation(tmp_path):
    code, out, _ = run(tmp_path, LEADING, "--stats", "--validate-unsat", "2")
    assert code == 1
    assert out[0] == "unsat"
    assert out[1] == "; validation: confirmed"
    assert any(line.startswith("; lemmas-symmetry ") for line in out)
    assert any(line.startswith("; iterations ") for line in out)


@pytest.mark.backend
def test_sat_model_and_get_value(tmp_path):
    code, out, _ = run(tmp_path, MODEL_EXAMPLE, "--model", "--validate-sat")
    assert code == 0
    assert out[0] == "sat" and out[1] == "; validation: confirmed"
    assert out[2] == "(model"
    defs = {line.split()[1]: line for line in out if line.strip().startswith("(define-fun")}
    assert set(defs) == {"x", "y", "z"}
    value_line = out[-1]
    assert value_line.startswith("((x ") and "(exp x z)" in value_line


@pytest.mark.backend
def test_unknown_reason_and_exit_code(tmp_path):
    text = "(declare-const x Int)(declare-const y Int)(assert (and (distinct y 0) (= (exp 2 x) (exp 3 y))))"
    code, out, _ = run(tmp_path, text, "--max-iterations", "5")
    assert code == 2
    assert out == ["unknown", "; reason: iteration-limit"]


@pytest.mark.backend
def test_push_pop_script(tmp_path):
    text = ("(declare-const x Int)(push 1)(assert (= (exp x 2) 2))(check-sat)(pop 1)"
            "(assert (= (exp x 2) 4))(check-sat)(get-model)")
    code, out, _ = run(tmp_path, text)
    assert code == 0
    assert out[:2] == ["unsat", "sat"]
    assert out[2] == "(model"


@pytest.mark.backend
def test_model_requests_without_sat(tmp_path):
    code, out, _ = run(tmp_path, "(declare-const x Int)(assert (< x x))(check-sat)(get-model)")
    assert code == 1
    assert out == ["unsat", '(error "model is not available")']


@pytest.mark.backend
def test_stdin_input():
    proc = subprocess.run([sys.executable, "-m", "eia.cli", "-"], input=LEADING,
                          capture_output=True, text=True, timeout=120)
    assert proc.returncode == 1 and proc.stdout.strip() == "unsat"
