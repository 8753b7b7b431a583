"""Refinement lemmas for the exp abstraction.

Four kinds of lemmas are generated over the *relevant terms* of a formula,
i.e. the closure of its exp applications under sign changes of either
argument: symmetry, monotonicity, bounding and (bilinear) interpolation.
Every lemma is valid when ``exp(c, d)`` means ``c ** |d|``.

:func:`refine` schedules them lazily: kinds are tried in the order above and
the first kind producing a lemma violated by the current model wins.
"""

from __future__ import annotations

import enum
import logging
from collections.abc import Iterable, Sequence
from dataclasses import dataclass, field

from . import terms as T
from .model import ModelView
from .preprocess import fold_constants
from .terms import DEFAULT_EXP_CAP, Term, eia_pow

log = logging.getLogger(__name__)


class Kind(str, enum.Enum):
    SYMMETRY = "symmetry"
    MONOTONICITY = "monotonicity"
    BOUNDING = "bounding"
    INTERPOLATION = "interpolation"

    def __str__(self) -> str:
        return self.value


PRECEDENCE = (Kind.SYMMETRY, Kind.MONOTONICITY, Kind.BOUNDING, Kind.INTERPOLATION)


@dataclass(frozen=True)
class Lemma:
    kind: Kind
    formula: Term
    schema: str
    origin: tuple[Term, ...] = ()

    def __str__(self) -> str:
        return f"[{self.schema}] {self.formula}"


def sign_variants(e: Term) -> tuple[Term, ...]:
    """``exp(s,t), exp(-s,t), exp(s,-t), exp(-s,-t)`` without duplicates."""
    s, t = e.args
    ns, nt = T.neg(s), T.neg(t)
    return tuple(dict.fromkeys((e, T.exp(ns, t), T.exp(s, nt), T.exp(ns, nt))))


@dataclass(frozen=True)
class RelevantTerm:
    """One orbit ``exp(±s, ±t)``; ``base`` is the first occurrence seen."""

    base: Term
    variants: tuple[Term, ...]

    @property
    def key(self) -> frozenset[Term]:
        return frozenset(self.variants)


def relevant_terms(*formulas: Term) -> list[RelevantTerm]:
    out: dict[frozenset, RelevantTerm] = {}
    for e in T.subterms_exp(*formulas):
        r = RelevantTerm(e, sign_variants(e))
        out.setdefault(r.key, r)
    return list(out.values())


# -- light, constant-only simplification of lemma formulas ---------------------

_TRIVIAL_REL = {"=": True, "<=": True, ">=": True, "<": False, ">": False, "distinct": False}


def simplify(t: Term) -> Term:
    """Fold ground subterms and propagate Boolean constants.

    Also decides comparisons between syntactically identical arguments.  This
    is the only reasoning applied to lemmas; it keeps printed lemmas close to
    their textbook form without being a general simplifier.
    """
    t = fold_constants(t)
    memo: dict[Term, Term] = {}
    for node in T.iter_dag(t):
        if not node.args:
            memo[node] = node
            continue
        args = [memo[a] for a in node.args]
        op = node.op
        if op in _TRIVIAL_REL and args[0] is args[1]:
            memo[node] = T.BoolConst(_TRIVIAL_REL[op])
        elif op in ("and", "or"):
            absorbing, neutral = (T.FALSE, T.TRUE) if op == "and" else (T.TRUE, T.FALSE)
            if any(a is absorbing for a in args):
                memo[node] = absorbing
            else:
                kept = list(dict.fromkeys(a for a in args if a is not neutral))
                memo[node] = (T.and_ if op == "and" else T.or_)(*kept)
        elif op == "not" and args[0].is_bool_const:
            memo[node] = T.BoolConst(args[0] is T.FALSE)
        elif op == "=>":
            if args[0] is T.FALSE or args[1] is T.TRUE:
                memo[node] = T.TRUE
            elif args[0] is T.TRUE:
                memo[node] = args[1]
            else:
                memo[node] = T.rebuild(node, args)
        else:
            memo[node] = T.rebuild(node, args)
    return memo[t]


def _make(kind: Kind, schema: str, formula: Term, origin: Sequence[Term]) -> Lemma | None:
    formula = simplify(formula)
    if formula is T.TRUE:
        return None
    return Lemma(kind, formula, schema, tuple(origin))


def _guarded(guards: Iterable[Term], conclusion: Term) -> Term:
    return T.implies(T.and_(*guards), conclusion)


# -- symmetry ----------------------------------------------------------------

def gen_symmetry(e: Term) -> list[Lemma]:
    """sym1-sym3 for the exp application ``e = exp(s, t)``."""
    s, t = e.args
    flipped_base = T.exp(T.neg(s), t)
    two = T.Int(2)
    candidates = [
        ("sym1", T.implies(T.eq(T.mod(t, two), T.ZERO), T.eq(e, flipped_base))),
        ("sym2", T.implies(T.eq(T.mod(t, two), T.ONE), T.eq(e, T.neg(flipped_base)))),
        ("sym3", T.eq(e, T.exp(s, T.neg(t)))),
    ]
    return [lem for schema, f in candidates
            if (lem := _make(Kind.SYMMETRY, schema, f, (e,))) is not None]


# -- monotonicity ------------------------------------------------------------

def monotonicity_applies(e1: Term, e2: Term, model: ModelView) -> bool:
    (s1, t1), (s2, t2) = e1.args, e2.args
    v = model.value
    return e1 is not e2 and v(s2) >= v(s1) > 1 and v(t2) >= v(t1) > 0


def monotonicity_lemma(e1: Term, e2: Term) -> Lemma | None:
    """``s2 >= s1 > 1 & t2 >= t1 > 0 & (s2 > s1 | t2 > t1) => e2 > e1``.

    When the bases (or exponents) are the same term the guard collapses to
    the strict comparison of the other argument.
    """
    (s1, t1), (s2, t2) = e1.args, e2.args
    if s1 is s2:
        guards = [T.gt(s1, 1), T.gt(t2, t1), T.gt(t1, 0)]
    elif t1 is t2:
        guards = [T.gt(s2, s1), T.gt(s1, 1), T.gt(t1, 0)]
    else:
        guards = [T.ge(s2, s1), T.gt(s1, 1), T.ge(t2, t1), T.gt(t1, 0),
                  T.or_(T.gt(s2, s1), T.gt(t2, t1))]
    return _make(Kind.MONOTONICITY, "mon", _guarded(guards, T.gt(e2, e1)), (e1, e2))


def gen_monotonicity(e1: Term, e2: Term, model: ModelView) -> Lemma | None:
    if not monotonicity_applies(e1, e2, model):
        return None
    return monotonicity_lemma(e1, e2)


# -- bounding ----------------------------------------------------------------

def _square(s: Term) -> Term:
    # (-u) * (-u) is written u * u
    if s.op == "*" and len(s.args) == 2 and s.args[0] is T.MINUS_ONE:
        s = s.args[1]
    return T.mul(s, s)


def bounding_lemmas(e: Term) -> list[Lemma]:
    """bnd1-bnd5 for ``e = exp(s, t)`` (no model check)."""
    s, t = e.args
    if s is t:
        bnd5 = _guarded([T.gt(s, 2)], T.gt(e, T.add(_square(s), T.ONE)))
    else:
        bnd5 = _guarded([T.gt(T.add(s, t), 4), T.gt(s, 1), T.gt(t, 1)],
                        T.gt(e, T.add(T.mul(s, t), T.ONE)))
    candidates = [
        ("bnd1", T.implies(T.eq(t, T.ZERO), T.eq(e, T.ONE))),
        ("bnd2", T.implies(T.eq(t, T.ONE), T.eq(e, s))),
        ("bnd3", T.iff(T.and_(T.eq(s, T.ZERO), T.ne(t, T.ZERO)), T.eq(e, T.ZERO))),
        ("bnd4", T.implies(T.eq(s, T.ONE), T.eq(e, T.ONE))),
        ("bnd5", bnd5),
    ]
    return [lem for schema, f in candidates
            if (lem := _make(Kind.BOUNDING, schema, f, (e,))) is not None]


def gen_bounding(e: Term, model: ModelView) -> list[Lemma]:
    s, t = e.args
    if model.value(s) >= 0 and model.value(t) >= 0:
        return bounding_lemmas(e)
    return []


# -- interpolation -----------------------------------------------------------

@dataclass(frozen=True)
class Bilinear:
    """``scale * exp(s,t)`` compared against ``st*s*t + s_*s + t_*t + const``."""

    scale: int
    st: int
    s: int
    t: int
    const: int

    def __call__(self, s: int, t: int) -> int:
        return self.st * s * t + self.s * s + self.t * t + self.const

    def term(self, s: Term, t: Term) -> Term:
        parts = []
        if self.st:
            parts.append(T.mul(T.Int(self.st), s, t))
        if self.s:
            parts.append(T.mul(T.Int(self.s), s))
        if self.t:
            parts.append(T.mul(T.Int(self.t), t))
        if self.const or not parts:
            parts.append(T.Int(self.const))
        return T.add(*parts)


# Lemma constants are sent to the backend as text; beyond this many bits the
# refinement gives up with ResourceLimit instead.
LEMMA_BIT_CAP = 1 << 16


def _pow(c: int, d: int, cap: int, bit_cap: int = LEMMA_BIT_CAP) -> int:
    return eia_pow(c, d, cap, bit_cap)


def upper_coefficients(c: int, d: int, c2: int, d2: int,
                       cap: int = DEFAULT_EXP_CAP) -> Bilinear:
    """Bilinear interpolant of ``x**y`` over the box spanned by two points,
    multiplied through by the (positive) interpolation divisors.

    First interpolate linearly in the base between ``c-`` and ``c+`` for the
    exponents ``d-`` and ``d+``, then linearly in the exponent between those
    two lines.  A zero-width side contributes no divisor and no slope.
    """
    if min(c, d, c2, d2) <= 0:
        raise ValueError("interpolation points must be positive")
    cm, cp = min(c, c2), max(c, c2)
    dm, dp = min(d, d2), max(d, d2)
    kc = cp - cm or 1
    kd = dp - dm or 1

    def line(e: int) -> tuple[int, int]:
        # kc * ip1(x, e) = alpha + beta * x
        lo, hi = _pow(cm, e, cap), _pow(cp, e, cap)
        beta = hi - lo
        return kc * lo - beta * cm, beta

    a_lo, b_lo = line(dm)
    a_hi, b_hi = line(dp)
    da, db = a_hi - a_lo, b_hi - b_lo
    return Bilinear(scale=kc * kd, st=db, s=kd * b_lo - dm * db, t=da,
                    const=kd * a_lo - dm * da)


def lower_coefficients(c: int, d: int, cap: int = DEFAULT_EXP_CAP) -> Bilinear:
    """Bilinear lower bound of ``x**y`` for ``x >= 1, y >= d``, exact on the
    four points ``{c, c+1} x {d, d+1}``."""
    if c <= 0 or d <= 0:
        raise ValueError("interpolation point must be positive")

    def line(e: int) -> tuple[int, int]:
        # c^e + ((c+1)^e - c^e) * (x - c) = alpha + beta * x
        lo, hi = _pow(c, e, cap), _pow(c + 1, e, cap)
        beta = hi - lo
        return lo - beta * c, beta

    a_lo, b_lo = line(d)
    a_hi, b_hi = line(d + 1)
    da, db = a_hi - a_lo, b_hi - b_lo
    return Bilinear(scale=1, st=db, s=b_lo - d * db, t=da, const=a_lo - d * da)


def bilinear_upper(s: Term, t: Term, c: int, d: int, c2: int, d2: int,
                   cap: int = DEFAULT_EXP_CAP) -> Lemma:
    """Upper interpolation lemma for ``exp(s, t)`` on the box of ``(c,d)``, ``(c2,d2)``."""
    coeffs = upper_coefficients(c, d, c2, d2, cap)
    cm, cp, dm, dp = min(c, c2), max(c, c2), min(d, d2), max(d, d2)
    guards = []
    guards += [T.eq(s, cm)] if cm == cp else [T.le(cm, s), T.le(s, cp)]
    guards += [T.eq(t, dm)] if dm == dp else [T.le(dm, t), T.le(t, dp)]
    e = T.exp(s, t)
    lhs = e if coeffs.scale == 1 else T.mul(T.Int(coeffs.scale), e)
    formula = _guarded(guards, T.le(lhs, coeffs.term(s, t)))
    return Lemma(Kind.INTERPOLATION, formula, "ip2", (e,))


def bilinear_lower(s: Term, t: Term, c: int, d: int,
                   cap: int = DEFAULT_EXP_CAP) -> Lemma:
    coeffs = lower_coefficients(c, d, cap)
    e = T.exp(s, t)
    formula = _guarded([T.ge(s, 1), T.ge(t, d)], T.ge(e, coeffs.term(s, t)))
    return Lemma(Kind.INTERPOLATION, formula, "ip3", (e,))


@dataclass
class InterpolationHistory:
    """Points at which upper interpolation lemmas were built, per orbit."""

    points: dict[frozenset, list[tuple[int, int]]] = field(default_factory=dict)

    def nearest(self, key: frozenset, c: int, d: int) -> tuple[int, int]:
        seen = self.points.get(key)
        if not seen:
            return c, d
        return min(seen, key=lambda p: ((p[0] - c) ** 2 + (p[1] - d) ** 2, p[0], p[1]))

    def record(self, key: frozenset, c: int, d: int) -> None:
        seen = self.points.setdefault(key, [])
        if (c, d) not in seen:
            seen.append((c, d))


def gen_interpolation(r: RelevantTerm, model: ModelView, history: InterpolationHistory,
                      cap: int = DEFAULT_EXP_CAP) -> list[Lemma]:
    out = []
    for e in r.variants:
        s, t = e.args
        c, d = model.value(s), model.value(t)
        if c <= 0 or d <= 0 or model.is_faithful(e):
            continue
        v = model.exp_values[e]
        if v > _pow(c, d, cap):
            c2, d2 = history.nearest(r.key, c, d)
            out.append(bilinear_upper(s, t, c, d, c2, d2, cap))
            history.record(r.key, c, d)
        else:
            out.append(bilinear_lower(s, t, c, d, cap))
    return out


# -- scheduling ----------------------------------------------------------------

def _generate(kind: Kind, rel: list[RelevantTerm], model: ModelView,
              history: InterpolationHistory, cap: int) -> list[Lemma]:
    variants = [e for r in rel for e in r.variants]
    if kind is Kind.SYMMETRY:
        return [lem for e in variants for lem in gen_symmetry(e)]
    if kind is Kind.MONOTONICITY:
        out = []
        for e1 in variants:
            for e2 in variants:
                lem = gen_monotonicity(e1, e2, model)
                if lem is not None:
                    out.append(lem)
        return out
    if kind is Kind.BOUNDING:
        return [lem for e in variants for lem in gen_bounding(e, model)]
    return [lem for r in rel for lem in gen_interpolation(r, model, history, cap)]


def refine(formulas: Sequence[Term], model: ModelView, history: InterpolationHistory,
           enabled: Iterable[Kind] = PRECEDENCE, known: set[Term] | frozenset = frozenset(),
           cap: int = DEFAULT_EXP_CAP) -> list[Lemma]:
    """Lemmas violated by ``model``, from the first kind (in precedence order)
    that yields any.  ``known`` formulas are never returned again.

    Returns an empty list only if no enabled kind produces a violated lemma,
    which cannot happen for a genuine counterexample with all kinds enabled.
    """
    enabled = set(enabled)
    rel = relevant_terms(*formulas)
    for kind in PRECEDENCE:
        if kind not in enabled:
            continue
        violated: dict[Term, Lemma] = {}
        for lem in _generate(kind, rel, model, history, cap):
            if lem.formula in known or lem.formula in violated:
                continue
            if not model.satisfies(lem.formula):
                violated[lem.formula] = lem
        if violated:
            log.debug("refine: %d %s lemma(s)", len(violated), kind)
            return list(violated.values())
    return []


__all__ = [
    "Bilinear", "InterpolationHistory", "Kind", "Lemma", "PRECEDENCE", "RelevantTerm",
    "LEMMA_BIT_CAP", "bilinear_lower", "bilinear_upper", "bounding_lemmas",
    "gen_bounding", "gen_interpolation", "gen_monotonicity", "gen_symmetry",
    "lower_coefficients", "monotonicity_lemma", "refine", "relevant_terms",
    "sign_variants", "simplify", "upper_coefficients",
]
