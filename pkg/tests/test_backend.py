import sys
import time

import pytest

from eia import terms as T
from eia.backend import BackendSpec, open_session, parse_int_value, total_division
from eia.errors import BackendTimeout, ProtocolError, SpawnFailure, ValueUnavailable
from eia.smtlib.parser import read_sexprs

x, y = T.Var("x"), T.Var("y")
backend = pytest.mark.backend


def fake_solver(tmp_path, body: str) -> BackendSpec:
    """A scripted stand-in that answers 'success' to everything except check-sat/get-value."""
    script = tmp_path / "fake.py"
    script.write_text(
        "import sys\n"
        "for line in sys.stdin:\n"
        "    line = line.strip()\n"
        + body +
        "    print('success', flush=True)\n")
    return BackendSpec((sys.executable, str(script)), "generic", 5)


def test_resolve_families(monkeypatch):
    monkeypatch.delenv("EIA_SOLVE_BACKEND", raising=False)
    assert BackendSpec.resolve("z3").argv[1:] == ("-in", "-smt2")
    assert BackendSpec.resolve("cmd:my-solver --flag").argv == ("my-solver", "--flag")
    monkeypatch.setenv("EIA_SOLVE_BACKEND", "/opt/z3/bin/z3")
    assert BackendSpec.resolve("z3").argv[0] == "/opt/z3/bin/z3"
    with pytest.raises(SpawnFailure):
        BackendSpec.resolve("yices")


def test_missing_binary_names_path():
    with pytest.raises(SpawnFailure, match="/no/such/solver"):
        open_session(BackendSpec(("/no/such/solver",)))


def test_negative_literals():
    assert parse_int_value(read_sexprs("(- 3)")[0]) == -3
    assert parse_int_value(read_sexprs("12345678901234567890")[0]) == 12345678901234567890
    with pytest.raises(ProtocolError):
        parse_int_value(read_sexprs("(/ 1 2)")[0])


def test_total_division_guards_symbolic_divisors():
    assert total_division(T.eq(T.div(x, 2), y)) is T.eq(T.div(x, 2), y)
    guarded = total_division(T.eq(T.mod(x, y), 1))
    assert guarded is T.eq(T.ite(T.eq(y, 0), x, T.mod(x, y)), 1)


def test_unexpected_check_answer(tmp_path):
    spec = fake_solver(tmp_path, "    if line == '(check-sat)':\n        print('banana', flush=True); continue\n")
    with open_session(spec) as s, pytest.raises(ProtocolError):
        s.check([T.gt(x, 0)])


def test_unknown_answer_propagates(tmp_path):
    spec = fake_solver(tmp_path, "    if line == '(check-sat)':\n        print('unknown', flush=True); continue\n")
    with open_session(spec) as s:
        assert s.check([T.gt(x, 0)]) == "unknown"


def test_value_refusal_and_garbage(tmp_path):
    body = ("    if line == '(check-sat)':\n        print('sat', flush=True); continue\n"
            "    if line.startswith('(get-value ((exp'):\n"
            "        print('(error \"no value\")', flush=True); continue\n"
            "    if line.startswith('(get-value'):\n        print('((x 1) (y', flush=True)\n"
            "        print(')))', flush=True); continue\n")
    with open_session(fake_solver(tmp_path, body)) as s:
        assert s.check([T.gt(x, 0)]) == "sat"
        with pytest.raises(ValueUnavailable):
            s.values([T.exp(x, y)])
        with pytest.raises(ProtocolError):
            s.values([x, y])


def test_backend_that_dies(tmp_path):
    spec = fake_solver(tmp_path, "    if line == '(check-sat)':\n        sys.exit(0)\n")
    with open_session(spec) as s, pytest.raises(ProtocolError):
        s.check([T.gt(x, 0)])


def test_silent_backend_times_out(tmp_path):
    spec = fake_solver(tmp_path, "    if line == '(check-sat)':\n        import time; time.sleep(60)\n")
    spec = BackendSpec(spec.argv, "generic", 0.5)
    start = time.monotonic()
    with open_session(spec) as s, pytest.raises(BackendTimeout):
        s.check([T.gt(x, 0)])
    assert time.monotonic() - start < 5


def test_generic_family_gets_standard_preamble_only(tmp_path):
    spec = fake_solver(tmp_path, "")
    with open_session(spec, record=True) as s:
        assert s.transcript == [
            "(set-option :print-success true)",
            "(set-option :produce-models true)",
            "(set-logic QF_UFNIA)",
            "(declare-fun exp (Int Int) Int)",
            "(push 1)",
        ]


@backend
def test_basic_answers():
    with open_session(BackendSpec.resolve(timeout=10)) as s:
        assert s.check([T.gt(x, 0)]) == "sat"
        assert s.check([T.FALSE]) == "unsat"
        assert s.check([T.eq(x, 7)]) == "sat"
        assert s.values([x]) == {x: 7}
        assert s.check([T.eq(x, -3)]) == "sat"
        assert s.values([x, T.gt(x, 0)]) == {x: -3, T.gt(x, 0): False}
        assert s.checks == 4


@backend
def test_values_of_sign_variant():
    ny = T.neg(y)
    with open_session(BackendSpec.resolve(timeout=10)) as s:
        assert s.check([T.gt(T.exp(x, y), 5)]) == "sat"
        vals = s.values([T.exp(ny, ny), T.exp(x, y)])
        assert all(isinstance(v, int) for v in vals.values())
        assert vals[T.exp(x, y)] > 5


@backend
def test_division_by_zero_follows_convention():
    with open_session(BackendSpec.resolve(timeout=10)) as s:
        phi = [T.eq(y, 0), T.eq(x, 5), T.ne(T.add(T.div(x, y), T.mod(x, y)), 5)]
        assert s.check(phi) == "unsat"


@backend
def test_incremental_sync_and_reset():
    with open_session(BackendSpec.resolve(timeout=10), record=True) as s:
        base = [T.gt(x, 0)]
        s.check(base)
        s.check(base + [T.lt(x, 5)])
        tail = s.transcript[-2:]
        assert tail == ["(assert (< x 5))", "(check-sat)"]
        assert s.check([T.lt(x, 0)]) == "sat"  # not an extension: level is rebuilt
        assert "(pop 1)" in s.transcript


@backend
def test_transcript_is_deterministic():
    formulas = [T.gt(T.mul(x, x), 4), T.eq(T.exp(x, T.mul(y, y)), T.exp(x, T.exp(y, y))),
                T.eq(T.mod(x, y), 1)]

    def run():
        with open_session(BackendSpec.resolve(timeout=10), record=True) as s:
            s.check(formulas)
            return s.transcript

    first = run()
    assert first == run()
    assert first[-5:] == [
        "(assert (> (* x x) 4))",
        "(declare-fun y () Int)",
        "(assert (= (exp x (* y y)) (exp x (exp y y))))",
        "(assert (= (ite (= y 0) x (mod x y)) 1))",
        "(check-sat)",
    ]
