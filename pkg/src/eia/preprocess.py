"""Constant folding and exp-eliminating rewrite rules, alternated to a fixpoint.

Rules (applied innermost first, leftmost first, each to fixpoint):

* ``R2``  exp(exp(x, y), z)      -> exp(x, y * z)
* ``R1``  exp(x, c)              -> x ** |c|      for an integer constant c
* ``R3``  exp(x, y) * exp(z, y)  -> exp(x * z, y)

At a single position R2 is tried before R1.  R1 is limited to ``|c| <=
power_cap`` and, for ``|c| >= 2``, to bases without ``exp`` so that the number
of exp nodes strictly decreases with every step.  ``exp(x, y) * exp(x, z) ->
exp(x, y + z)`` is unsound under ``|y|`` semantics and is deliberately absent.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

from . import terms as T
from .errors import ResourceLimit
from .terms import DEFAULT_EXP_CAP, Evaluator, Term

DEFAULT_POWER_CAP = 64


class RewriteStep(NamedTuple):
    rule: str  # "R1", "R2", "R3" or "FOLD"
    position: tuple[int, ...]
    before: Term
    after: Term


RewriteTrace = list[RewriteStep]


def replay(phi: Term, trace: RewriteTrace) -> Term:
    """Re-apply a recorded trace; every step replaces all copies of its redex."""
    for step in trace:
        phi = T.substitute(phi, {step.before: step.after})
    return phi


def _is_value(t: Term) -> bool:
    return t.op in ("const", "true", "false")


def fold_constants(phi: Term, trace: RewriteTrace | None = None,
                   cap: int = DEFAULT_EXP_CAP) -> Term:
    """Replace every maximal variable-free subterm by its value.

    A ground subterm whose evaluation hits the size cap is left alone.
    """
    memo: dict[Term, Term] = {}
    evaluate = Evaluator({}, cap=cap)

    def go(t: Term, path: tuple[int, ...]) -> Term:
        if t in memo:
            return memo[t]
        if not t.args:
            memo[t] = t
            return t
        u = T.rebuild(t, [go(a, path + (i,)) for i, a in enumerate(t.args)])
        if all(_is_value(a) for a in u.args):
            try:
                v = evaluate(u)
            except ResourceLimit:
                v = None
            if v is not None:
                r = T.BoolConst(v) if isinstance(v, bool) else T.Int(v)
                if trace is not None:
                    trace.append(RewriteStep("FOLD", path, u, r))
                u = r
        memo[t] = u
        return u

    return go(phi, ())


def normalize_product(*factors: Term) -> Term:
    """Flatten nested products and collect their integer constants in front."""
    k = 1
    rest: list[Term] = []
    stack = list(reversed(factors))
    while stack:
        f = stack.pop()
        if f.op == "*":
            stack.extend(reversed(f.args))
        elif f.op == "const":
            k *= f.value  # type: ignore[operator]
        else:
            rest.append(f)
    if k == 0:
        return T.ZERO
    if k != 1 or not rest:
        rest.insert(0, T.Int(k))
    return T.mul(*rest)


@dataclass
class Rewriter:
    power_cap: int = DEFAULT_POWER_CAP

    def root_step(self, u: Term) -> tuple[str, Term] | None:
        if u.op == "exp":
            base, e = u.args
            if base.op == "exp":
                return "R2", T.exp(base.args[0], normalize_product(base.args[1], e))
            if e.op == "const":
                c = abs(e.value)  # type: ignore[arg-type]
                if c <= 1 or (c <= self.power_cap and not T.contains_exp(base)):
                    return "R1", T.power(base, c)
        elif u.op == "*":
            args = u.args
            for i, a in enumerate(args):
                if a.op != "exp":
                    continue
                for j in range(i + 1, len(args)):
                    b = args[j]
                    if b.op == "exp" and b.args[1] is a.args[1]:
                        merged = T.exp(normalize_product(a.args[0], b.args[0]), a.args[1])
                        rest = list(args)
                        rest[i] = merged
                        del rest[j]
                        return "R3", T.mul(*rest)
        return None

    def __call__(self, phi: Term, trace: RewriteTrace | None = None) -> Term:
        memo: dict[Term, Term] = {}

        def go(t: Term, path: tuple[int, ...]) -> Term:
            if t in memo:
                return memo[t]
            u = t
            if t.args:
                u = T.rebuild(t, [go(a, path + (i,)) for i, a in enumerate(t.args)])
            step = self.root_step(u)
            if step is not None:
                rule, r = step
                if trace is not None:
                    trace.append(RewriteStep(rule, path, u, r))
                u = go(r, path)
            memo[t] = u
            return u

        return go(phi, ())


def rewrite(phi: Term, trace: RewriteTrace | None = None,
            power_cap: int = DEFAULT_POWER_CAP) -> Term:
    """Apply R1-R3 innermost-first until no rule matches."""
    return Rewriter(power_cap)(phi, trace)


def preprocess(phi: Term, rewriting: bool = True, constant_folding: bool = True,
               trace: RewriteTrace | None = None, power_cap: int = DEFAULT_POWER_CAP,
               cap: int = DEFAULT_EXP_CAP) -> Term:
    """Alternate constant folding and rewriting until the formula stops changing."""
    while True:
        before = phi
        if constant_folding:
            phi = fold_constants(phi, trace, cap)
        if rewriting:
            phi = rewrite(phi, trace, power_cap)
        if phi is before:
            return phi
