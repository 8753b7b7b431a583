import random

import pytest

from eia import terms as T
from eia.errors import ResourceLimit
from eia.preprocess import (RewriteStep, fold_constants, normalize_product, preprocess, replay,
                            rewrite)
from eia.randgen import FormulaGen
from eia.smtlib import parse_term

x, y, z = T.Var("x"), T.Var("y"), T.Var("z")
s, a, b, n = T.Var("s"), T.Var("a"), T.Var("b"), T.Var("n")

LEADING = parse_term("(and (> (* x x) 4) (> (* y y) 4) (= (exp (exp x y) y) (exp x (exp y y))))")
GOAL = parse_term("(and (> (* x x) 4) (> (* y y) 4) (= (exp x (* y y)) (exp x (exp y y))))")


def test_leading_example_single_r2_step():
    trace = []
    out = preprocess(LEADING, trace=trace)
    assert out is GOAL
    assert trace == [RewriteStep("R2", (2, 0), T.exp(T.exp(x, y), y), T.exp(x, T.mul(y, y)))]
    assert replay(LEADING, trace) is out


@pytest.mark.parametrize("before, after", [
    (T.add(T.exp(2, 3), x), T.add(8, x)),
    (T.exp(0, 0), T.ONE),
    (T.gt(T.mul(3, 4), y), T.gt(12, y)),
    (T.exp(-2, -3), T.Int(-8)),
])
def test_fold_constants(before, after):
    assert fold_constants(before) is after


def test_fold_leaves_oversized_ground_terms():
    huge = T.exp(2, 10 ** 9)
    assert fold_constants(T.gt(huge, x)) is T.gt(huge, x)


@pytest.mark.parametrize("before, after", [
    (T.exp(s, 1), s),
    (T.exp(s, 0), T.ONE),
    (T.exp(s, -3), T.mul(s, s, s)),
    (T.mul(T.exp(a, n), T.exp(b, n)), T.exp(T.mul(a, b), n)),
    (T.exp(T.exp(2, x), 3), T.exp(2, T.mul(3, x))),
    (T.exp(T.exp(x, y), y), T.exp(x, T.mul(y, y))),
])
def test_rewrite_rules(before, after):
    assert rewrite(before) is after


def test_r1_respects_the_power_cap():
    assert rewrite(T.exp(x, 65)) is T.exp(x, 65)
    assert rewrite(T.exp(x, 64)) is T.power(x, 64)
    assert rewrite(T.exp(x, 5), power_cap=4) is T.exp(x, 5)


def test_same_base_product_is_not_merged():
    # exp(x,y) * exp(x,z) = exp(x, y+z) fails for y = 1, z = -1 under |.|
    t = T.mul(T.exp(x, y), T.exp(x, z))
    assert rewrite(t) is t
    assert preprocess(T.eq(t, 7)) is T.eq(t, 7)


def test_exp_free_formula_unchanged():
    phi = T.and_(T.gt(T.mul(x, y), z), T.le(x, 3))
    assert preprocess(phi) is phi


def test_switches():
    phi = T.eq(T.add(T.exp(2, 3), T.exp(x, 2)), y)
    assert preprocess(phi, rewriting=False) is T.eq(T.add(8, T.exp(x, 2)), y)
    assert preprocess(phi, constant_folding=False) is T.eq(T.add(T.mul(2, 2, 2), T.mul(x, x)), y)
    assert preprocess(phi, rewriting=False, constant_folding=False) is phi


def test_normalize_product():
    assert normalize_product(x, T.mul(3, y), T.Int(2)) is T.mul(6, x, y)
    assert normalize_product(x, T.ZERO) is T.ZERO
    assert normalize_product(T.Int(2), T.Int(3)) is T.Int(6)


def test_nested_exp_example_equivalent_on_random_assignments():
    phi = T.exp(T.exp(2, x), 3)
    out = preprocess(phi)
    assert out is T.exp(2, T.mul(3, x))
    rng = random.Random(3)
    for _ in range(1000):
        sigma = {"x": rng.randint(-40, 40)}
        assert T.eval_eia(phi, sigma) == T.eval_eia(out, sigma)


def test_trace_replay_reproduces_output():
    for seed in range(300):
        phi = FormulaGen(random.Random(seed), max_exp=3).fresh(with_exp=True)
        trace = []
        out = preprocess(phi, trace=trace)
        assert replay(phi, trace) is out


def test_exp_occurrences_never_increase():
    for seed in range(500):
        phi = FormulaGen(random.Random(seed), max_exp=4).fresh(with_exp=True)
        trace = []
        rewrite(phi, trace)
        for step in trace:
            assert T.count_exp_occurrences(step.after) < T.count_exp_occurrences(step.before)
        assert T.count_exp_occurrences(preprocess(phi)) <= T.count_exp_occurrences(phi)


def rule_redexes(gen: FormulaGen) -> T.Term:
    """A formula built around R2 and R3 redexes, which random formulas rarely contain."""
    w = gen.small()
    product = T.mul(T.exp(gen.small(), w), T.exp(gen.small(), w), gen.leaf())
    tower = T.exp(T.exp(gen.small(), gen.small()), gen.rng.choice([gen.small(), T.Int(2)]))
    rel = gen.rng.choice([T.eq, T.lt, T.ge])
    return T.or_(rel(product, tower), gen.atom(3))


def semantic_mismatches(formulas: int, assignments: int, seed: int = 0) -> int:
    """Count (formula, assignment) pairs on which preprocessing changes the value."""
    rng = random.Random(seed)
    bad = 0
    for i in range(formulas):
        gen = FormulaGen(random.Random(seed * 100003 + i), max_exp=3)
        phi = gen.fresh(with_exp=True) if i % 2 else rule_redexes(gen)
        out = preprocess(phi)
        for _ in range(assignments):
            sigma = {v: rng.randint(-6, 6) for v in "xyz"}
            try:
                expected = T.eval_eia(phi, sigma)
            except ResourceLimit:
                continue
            if T.eval_eia(out, sigma) != expected:
                bad += 1
    return bad


def test_semantic_preservation_small():
    assert semantic_mismatches(200, 30) == 0
