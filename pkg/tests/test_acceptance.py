"""End-to-end acceptance checks, one per criterion.

Each test prints a ``PASS``/``FAIL`` line (visible in ``pytest -v`` output)
and then asserts.
"""

import random
import subprocess
import sys
import time

import pytest

from test_lemmas import dominance_violations, false_lemmas, progress_failures
from test_preprocess import GOAL, LEADING, semantic_mismatches

from eia import terms as T
from eia.bench import PRESETS, conflicts, desk_corpus, run_suite, totals
from eia.engine import SAT, UNSAT, SolveConfig, solve
from eia.lemmas import lower_coefficients, upper_coefficients
from eia.preprocess import RewriteStep, preprocess
from eia.randgen import FormulaGen
from eia.validate import CONFIRMED, REFUTED, brute_force, validate_sat, validate_unsat

x, y = T.Var("x"), T.Var("y")

MODEL_SCRIPT = """(declare-const x Int)(declare-const y Int)(declare-const z Int)
(assert (and (< 1 x) (< x y) (< 0 z) (< (exp x z) (exp y z))))
(check-sat)
"""
DIVERGENT_SCRIPT = """(declare-const x Int)(declare-const y Int)
(assert (and (distinct y 0) (= (exp 2 x) (exp 3 y))))
(check-sat)
"""


@pytest.fixture
def report(capsys):
    def emit(number: int, ok: bool, detail: str) -> None:
        with capsys.disabled():
            print(f"\n{'PASS' if ok else 'FAIL'} criterion {number}: {detail}")
        assert ok, detail
    return emit


def cli(text: str, *flags: str):
    start = time.monotonic()
    proc = subprocess.run([sys.executable, "-m", "eia.cli", "-", *flags], input=text,
                          capture_output=True, text=True, timeout=300)
    return proc.stdout.splitlines(), time.monotonic() - start


@pytest.mark.backend
def test_criterion_1_leading_example(report):
    out, elapsed = cli((desk_corpus() / "leading_unsat.smt2").read_text(), "--stats")
    stats = {line[2:].split()[0]: line.split()[-1] for line in out if line.startswith("; ")}
    counts = {k: int(stats.get(f"lemmas-{k}", 0))
              for k in ("symmetry", "monotonicity", "bounding", "interpolation")}
    ok = (out[:1] == ["unsat"] and elapsed < 10
          and all(counts[k] > 0 for k in ("symmetry", "monotonicity", "bounding")))
    report(1, ok, f"verdict {out[:1]} in {elapsed:.2f}s, lemma counts {counts}")


@pytest.mark.backend
def test_criterion_2_sat_with_validation(report):
    out, elapsed = cli(MODEL_SCRIPT, "--validate-sat", "--model")
    ok = out[:2] == ["sat", "; validation: confirmed"] and elapsed < 10
    report(2, ok, f"output {out[:2]} in {elapsed:.2f}s, model {out[3:6]}")


def test_criterion_3_golden_interpolation_coefficients(report):
    low = lower_coefficients(3, 9)
    low_ok = (low.st, low.s, low.t, low.const) == (747066, -6481133, -2201832, 19108788)
    up = upper_coefficients(3, 9, 1, 1)
    # the printed rational form s + ((1 + 9841(s-1) - s)/8)(t-1), times 16
    mismatches = sum(up(s, t) != 16 * s + 2 * (9840 * s - 9840) * (t - 1)
                     for s in range(21) for t in range(21))
    ok = low_ok and up.scale == 16 and mismatches == 0
    report(3, ok, f"lower {low}, upper {up}, identity mismatches {mismatches}/441")


def test_criterion_4_preprocessing(report):
    trace = []
    out = preprocess(LEADING, trace=trace)
    expected = [RewriteStep("R2", (2, 0), T.exp(T.exp(x, y), y), T.exp(x, T.mul(y, y)))]
    start = time.monotonic()
    bad = semantic_mismatches(1000, 100)
    ok = out is GOAL and trace == expected and bad == 0
    report(4, ok, f"trace {[(s.rule, s.position) for s in trace]}, "
                  f"{bad} mismatches over 1000x100 in {time.monotonic() - start:.1f}s")


def test_criterion_5_progress(report):
    failures, skipped = progress_failures(10_000, seed=1)
    report(5, failures == 0,
           f"{failures} failures over 10000 pairs ({skipped} capped or faithful draws replaced)")


def test_criterion_6_lemma_validity(report):
    counts, bad = false_lemmas(10_000, seed=1)
    report(6, not bad and min(counts.values()) >= 10_000,
           f"false instances {bad or 0}; instances per schema {counts}")


def test_criterion_7_interpolation_brute_force(report):
    start = time.monotonic()
    bad = dominance_violations(limit=4, box=8)
    elapsed = time.monotonic() - start
    report(7, bad == 0 and elapsed < 60, f"{bad} violations in {elapsed:.2f}s")


@pytest.mark.backend
def test_criterion_8_incompleteness(report):
    out, elapsed = cli(DIVERGENT_SCRIPT, "--max-iterations", "50", "--timeout", "60")
    report(8, out[:1] == ["unknown"], f"output {out} in {elapsed:.1f}s")


def differential(formulas: int, seed: int = 0):
    config = SolveConfig(timeout=2, max_iterations=60)
    contradictions, verdicts, unsat_checked = [], {}, 0
    for i in range(formulas):
        gen = FormulaGen(random.Random(seed * 1_000_003 + i), max_depth=4, max_exp=2)
        phi = gen.fresh(with_exp=i % 5 != 0)
        result = solve(phi, config)
        verdicts[result.verdict] = verdicts.get(result.verdict, 0) + 1
        oracle = brute_force(phi, 5)
        if oracle.sat and result.verdict == UNSAT:
            contradictions.append(("unsat vs brute force", phi, oracle.witness))
        if result.verdict == SAT and validate_sat(phi, result.model).verdict != CONFIRMED:
            contradictions.append(("sat not confirmed", phi, result.model.assignment))
        if result.verdict == UNSAT:
            rep = validate_unsat(phi, k=3, timeout=30)
            unsat_checked += rep.verdict == CONFIRMED
            if rep.verdict == REFUTED:
                contradictions.append(("unsat refuted", phi, rep.witness))
    return contradictions, verdicts, unsat_checked


@pytest.mark.backend
@pytest.mark.slow
def test_criterion_9_differential_oracles(report):
    start = time.monotonic()
    bad, verdicts, confirmed = differential(500)
    elapsed = time.monotonic() - start
    report(9, not bad and elapsed < 600,
           f"{len(bad)} contradictions over 500 formulas in {elapsed:.0f}s; verdicts {verdicts}; "
           f"unsat confirmed with k=3: {confirmed}/{verdicts.get(UNSAT, 0)}"
           + (f"; first {bad[0]}" if bad else ""))


@pytest.mark.backend
@pytest.mark.slow
def test_criterion_10_ablation_soundness(report):
    records = run_suite(desk_corpus(), PRESETS, timeout=10)
    bad = conflicts(records)
    solved = {name: c[SAT] + c[UNSAT] for name, c in totals(records).items()}
    report(10, len(records) == 84 and not bad,
           f"{len(records)} runs, sat/unsat conflicts {bad}; solved per config {solved}")
