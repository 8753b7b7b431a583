"""Random formulas over integers with ``exp``, for fuzzing and differential tests."""

from __future__ import annotations

import random
from dataclasses import dataclass

from . import terms as T
from .terms import Term


@dataclass
class FormulaGen:
    rng: random.Random
    variables: tuple[str, ...] = ("x", "y", "z")
    max_depth: int = 4
    max_exp: int = 2
    const_range: int = 4

    def __post_init__(self):
        self._exps = 0

    def var(self) -> Term:
        return T.Var(self.rng.choice(self.variables))

    def const(self) -> Term:
        return T.Int(self.rng.randint(-self.const_range, self.const_range))

    def leaf(self) -> Term:
        return self.var() if self.rng.random() < 0.65 else self.const()

    def small(self) -> Term:
        """Operand of exp: a leaf, a negated leaf, or a sum/product of two leaves."""
        r = self.rng.random()
        if r < 0.6:
            return self.leaf()
        if r < 0.75:
            return T.neg(self.var())
        op = T.add if r < 0.9 else T.mul
        return op(self.leaf(), self.leaf())

    def int_term(self, depth: int) -> Term:
        rng = self.rng
        if depth <= 1:
            return self.leaf()
        r = rng.random()
        if r < 0.3 and self._exps < self.max_exp:
            self._exps += 1
            base = self.small() if rng.random() < 0.8 else self.int_term(depth - 1)
            return T.exp(base, self.small())
        if r < 0.45:
            return self.leaf()
        if r < 0.6:
            return T.add(self.int_term(depth - 1), self.int_term(depth - 1))
        if r < 0.7:
            return T.sub(self.int_term(depth - 1), self.int_term(depth - 1))
        if r < 0.85:
            return T.mul(self.int_term(depth - 1), self.leaf())
        divisor = rng.choice([-3, -2, 2, 3])
        return (T.mod if rng.random() < 0.5 else T.div)(self.int_term(depth - 1), divisor)

    def atom(self, depth: int) -> Term:
        rel = self.rng.choice([T.eq, T.ne, T.lt, T.le, T.gt, T.ge])
        return rel(self.int_term(depth - 1), self.int_term(depth - 1))

    def formula(self, depth: int | None = None) -> Term:
        depth = self.max_depth if depth is None else depth
        if depth <= 2:
            return self.atom(max(depth, 2))
        r = self.rng.random()
        if r < 0.4:
            return self.atom(depth)
        if r < 0.65:
            return T.and_(self.formula(depth - 1), self.formula(depth - 1))
        if r < 0.85:
            return T.or_(self.formula(depth - 1), self.formula(depth - 1))
        if r < 0.95:
            return T.not_(self.formula(depth - 1))
        return T.implies(self.formula(depth - 1), self.formula(depth - 1))

    def fresh(self, with_exp: bool = False) -> Term:
        """A new formula; with ``with_exp`` it is retried until it contains exp."""
        if with_exp and (self.max_depth < 3 or self.max_exp < 1):
            raise ValueError("exp needs max_depth >= 3 and max_exp >= 1")
        while True:
            self._exps = 0
            phi = self.formula()
            if not with_exp or T.contains_exp(phi):
                return phi


def random_formula(seed: int, **kwargs) -> Term:
    return FormulaGen(random.Random(seed), **kwargs).fresh()


def random_assignment(rng: random.Random, variables, lo: int = -6, hi: int = 6) -> dict[str, int]:
    return {v: rng.randint(lo, hi) for v in variables}
