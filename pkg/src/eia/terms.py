"""Hash-consed terms over integer arithmetic with a binary ``exp`` symbol.

Every :class:`Term` is interned: building the same tree twice returns the very
same object, so equality and hashing are identity based and subterm tests are
O(1).  Constructors below check sorts and arities eagerly.

The module also hosts the ground-truth evaluator.  ``exp(c, d)`` denotes
``c ** abs(d)`` (so ``exp(0, 0) == 1``), and ``div``/``mod`` follow the
SMT-LIB convention in which the remainder is never negative.
"""

from __future__ import annotations

import enum
import itertools
import threading
import weakref
from collections.abc import Iterable, Iterator, Mapping

from .errors import EiaError, InternalError, ResourceLimit, UnboundVariable

DEFAULT_EXP_CAP = 1 << 20
# Largest result (in bits) a single exponentiation may produce.
DEFAULT_BIT_CAP = 1 << 24


class Sort(enum.Enum):
    BOOL = "Bool"
    INT = "Int"

    def __str__(self) -> str:
        return self.value


BOOL = Sort.BOOL
INT = Sort.INT

BOOL_CONNECTIVES = frozenset({"not", "and", "or", "=>"})
ARITH_OPS = frozenset({"+", "-", "*", "div", "mod"})
COMPARISONS = frozenset({"<", "<=", ">", ">="})
NARY_OPS = frozenset({"and", "or", "+", "-", "*"})
OPERATORS = BOOL_CONNECTIVES | ARITH_OPS | COMPARISONS | {"=", "distinct", "ite", "exp"}


class Term:
    """An immutable, interned term.  Do not instantiate directly."""

    __slots__ = ("op", "args", "value", "sort", "uid", "__weakref__")

    op: str
    args: tuple[Term, ...]
    value: int | str | None
    sort: Sort
    uid: int

    def __setattr__(self, key, value):
        raise AttributeError("terms are immutable")

    def __reduce__(self):
        return (_rebuild, (self.op, self.args, self.value, self.sort))

    # Identity based equality is inherited from object; interning makes it
    # coincide with structural equality.

    def __lt__(self, other: Term) -> bool:
        return self.uid < other.uid

    @property
    def is_const(self) -> bool:
        return self.op == "const"

    @property
    def is_var(self) -> bool:
        return self.op == "var"

    @property
    def is_exp(self) -> bool:
        return self.op == "exp"

    @property
    def is_bool_const(self) -> bool:
        return self.op in ("true", "false")

    @property
    def name(self) -> str:
        if self.op != "var":
            raise AttributeError(f"{self.op} term has no name")
        return self.value  # type: ignore[return-value]

    def __str__(self) -> str:
        from .smtlib.printer import print_term

        return print_term(self)

    def __repr__(self) -> str:
        return f"Term({self})"


_table: weakref.WeakValueDictionary = weakref.WeakValueDictionary()
_table_lock = threading.Lock()
_uids = itertools.count()


def _intern(op: str, args: tuple[Term, ...], value, sort: Sort) -> Term:
    key = (op, value, sort, args)
    with _table_lock:
        term = _table.get(key)
        if term is None:
            term = object.__new__(Term)
            setter = object.__setattr__
            setter(term, "op", op)
            setter(term, "args", args)
            setter(term, "value", value)
            setter(term, "sort", sort)
            setter(term, "uid", next(_uids))
            _table[key] = term
        return term


def _rebuild(op, args, value, sort):
    return _intern(op, args, value, sort)


def interned_count() -> int:
    return len(_table)


# -- leaves -----------------------------------------------------------------

def Int(value: int) -> Term:
    if isinstance(value, bool) or not isinstance(value, int):
        raise TypeError(f"integer constant expected, got {value!r}")
    return _intern("const", (), int(value), INT)


def Var(name: str, sort: Sort = INT) -> Term:
    if not isinstance(name, str) or not name:
        raise ValueError("variable names must be non-empty strings")
    return _intern("var", (), name, sort)


TRUE = _intern("true", (), None, BOOL)
FALSE = _intern("false", (), None, BOOL)
ZERO = Int(0)
ONE = Int(1)
MINUS_ONE = Int(-1)


def BoolConst(value: bool) -> Term:
    return TRUE if value else FALSE


# -- generic application ----------------------------------------------------

def _check(op: str, args: tuple[Term, ...]) -> Sort:
    n = len(args)
    sorts = [a.sort for a in args]
    if op == "not":
        if n != 1 or sorts[0] is not BOOL:
            raise EiaError("not expects one Bool argument")
        return BOOL
    if op in ("and", "or", "=>"):
        if n < 2 or any(s is not BOOL for s in sorts):
            raise EiaError(f"{op} expects at least two Bool arguments")
        if op == "=>" and n != 2:
            raise EiaError("=> is binary; chains are desugared by the parser")
        return BOOL
    if op in ("+", "-", "*"):
        if n < 2 or any(s is not INT for s in sorts):
            raise EiaError(f"{op} expects at least two Int arguments")
        return INT
    if op in ("div", "mod", "exp"):
        if n != 2 or any(s is not INT for s in sorts):
            raise EiaError(f"{op} expects two Int arguments")
        return INT
    if op in COMPARISONS:
        if n != 2 or any(s is not INT for s in sorts):
            raise EiaError(f"{op} expects two Int arguments")
        return BOOL
    if op in ("=", "distinct"):
        if n != 2 or sorts[0] is not sorts[1]:
            raise EiaError(f"{op} expects two arguments of the same sort")
        return BOOL
    if op == "ite":
        if n != 3 or sorts[0] is not BOOL or sorts[1] is not sorts[2]:
            raise EiaError("ite expects (Bool, T, T)")
        return sorts[1]
    raise EiaError(f"unknown operator {op!r}")


def mk(op: str, *args: Term) -> Term:
    """Build ``op(args)`` verbatim, with sort checking but no simplification."""
    for a in args:
        if not isinstance(a, Term):
            raise TypeError(f"argument {a!r} of {op} is not a Term")
    return _intern(op, tuple(args), None, _check(op, args))


def rebuild(t: Term, args: Iterable[Term]) -> Term:
    """Return ``t`` with its arguments replaced (leaves are returned as is)."""
    args = tuple(args)
    if args == t.args:
        return t
    return mk(t.op, *args)


# -- convenience constructors ------------------------------------------------

def _lift(x) -> Term:
    if isinstance(x, Term):
        return x
    if isinstance(x, bool):
        return BoolConst(x)
    if isinstance(x, int):
        return Int(x)
    raise TypeError(f"cannot convert {x!r} to a term")


def and_(*args) -> Term:
    args = [_lift(a) for a in args]
    if not args:
        return TRUE
    if len(args) == 1:
        return args[0]
    return mk("and", *args)


def or_(*args) -> Term:
    args = [_lift(a) for a in args]
    if not args:
        return FALSE
    if len(args) == 1:
        return args[0]
    return mk("or", *args)


def not_(a) -> Term:
    return mk("not", _lift(a))


def implies(a, b) -> Term:
    return mk("=>", _lift(a), _lift(b))


def iff(a, b) -> Term:
    return mk("=", _lift(a), _lift(b))


def eq(a, b) -> Term:
    return mk("=", _lift(a), _lift(b))


def ne(a, b) -> Term:
    return mk("distinct", _lift(a), _lift(b))


def lt(a, b) -> Term:
    return mk("<", _lift(a), _lift(b))


def le(a, b) -> Term:
    return mk("<=", _lift(a), _lift(b))


def gt(a, b) -> Term:
    return mk(">", _lift(a), _lift(b))


def ge(a, b) -> Term:
    return mk(">=", _lift(a), _lift(b))


def ite(c, a, b) -> Term:
    return mk("ite", _lift(c), _lift(a), _lift(b))


def add(*args) -> Term:
    args = [_lift(a) for a in args]
    if not args:
        return ZERO
    if len(args) == 1:
        return args[0]
    return mk("+", *args)


def sub(*args) -> Term:
    args = [_lift(a) for a in args]
    if len(args) == 1:
        return neg(args[0])
    return mk("-", *args)


def mul(*args) -> Term:
    args = [_lift(a) for a in args]
    if not args:
        return ONE
    if len(args) == 1:
        return args[0]
    return mk("*", *args)


def div(a, b) -> Term:
    return mk("div", _lift(a), _lift(b))


def mod(a, b) -> Term:
    return mk("mod", _lift(a), _lift(b))


def exp(base, exponent) -> Term:
    return mk("exp", _lift(base), _lift(exponent))


def neg(t) -> Term:
    """Unary minus, desugared.

    Constants are negated directly, ``(* -1 u)`` becomes ``u`` and anything
    else becomes ``(* -1 t)``, so ``neg`` is an involution on terms.
    """
    t = _lift(t)
    if t.sort is not INT:
        raise EiaError("unary minus expects an Int argument")
    if t.op == "const":
        return Int(-t.value)  # type: ignore[operator]
    if t.op == "*" and len(t.args) == 2 and t.args[0] is MINUS_ONE:
        return t.args[1]
    return mk("*", MINUS_ONE, t)


def power(t, n: int) -> Term:
    """``t ** n`` for a natural number ``n``, desugared into a product."""
    t = _lift(t)
    if n < 0:
        raise ValueError("power expects a non-negative exponent")
    if n == 0:
        return ONE
    return mul(*([t] * n))


# -- traversal ----------------------------------------------------------------

def iter_dag(t: Term) -> Iterator[Term]:
    """Yield every distinct subterm of ``t`` once, children before parents."""
    seen: set[int] = set()
    stack: list[tuple[Term, bool]] = [(t, False)]
    while stack:
        node, expanded = stack.pop()
        if expanded:
            yield node
            continue
        if id(node) in seen:
            continue
        seen.add(id(node))
        stack.append((node, True))
        for a in reversed(node.args):
            if id(a) not in seen:
                stack.append((a, False))


def subterms_exp(*terms: Term) -> list[Term]:
    """Distinct ``exp`` applications occurring in ``terms``, innermost first."""
    out: dict[Term, None] = {}
    for t in terms:
        for node in iter_dag(t):
            if node.op == "exp":
                out.setdefault(node)
    return list(out)


def free_vars(*terms: Term) -> list[Term]:
    out: dict[Term, None] = {}
    for t in terms:
        for node in iter_dag(t):
            if node.op == "var":
                out.setdefault(node)
    return list(out)


def contains_exp(t: Term) -> bool:
    return any(node.op == "exp" for node in iter_dag(t))


def is_ground(t: Term) -> bool:
    return not any(node.op == "var" for node in iter_dag(t))


def tree_size(t: Term) -> int:
    """Number of nodes of ``t`` viewed as a tree (shared subterms counted again)."""
    memo: dict[Term, int] = {}
    for node in iter_dag(t):
        memo[node] = 1 + sum(memo[a] for a in node.args)
    return memo[t]


def count_exp_occurrences(t: Term) -> int:
    """Number of ``exp`` nodes in the tree view of ``t``."""
    memo: dict[Term, int] = {}
    for node in iter_dag(t):
        memo[node] = (node.op == "exp") + sum(memo[a] for a in node.args)
    return memo[t]


def substitute(t: Term, mapping: Mapping[Term, Term]) -> Term:
    """Simultaneously replace subterms of ``t`` according to ``mapping``."""
    memo: dict[Term, Term] = {}
    for node in iter_dag(t):
        if node in mapping:
            memo[node] = mapping[node]
        elif node.args:
            memo[node] = rebuild(node, (memo[a] for a in node.args))
        else:
            memo[node] = node
    return memo[t]


# -- semantics ----------------------------------------------------------------

def smt_div(a: int, b: int) -> int:
    """SMT-LIB integer division: ``a == b * q + r`` with ``0 <= r < |b|``.

    Division by zero is unspecified by SMT-LIB; we fix ``a div 0 = 0``.
    """
    if b == 0:
        return 0
    if b > 0:
        return a // b
    return -(a // -b)


def smt_mod(a: int, b: int) -> int:
    """SMT-LIB remainder, always in ``[0, |b|)``; ``a mod 0 = a``."""
    if b == 0:
        return a
    return a - b * smt_div(a, b)


def eia_pow(base: int, exponent: int, cap: int = DEFAULT_EXP_CAP,
            bit_cap: int = DEFAULT_BIT_CAP) -> int:
    """``base ** abs(exponent)`` with explicit size limits."""
    e = abs(exponent)
    if base == 0:
        return 1 if e == 0 else 0
    if base == 1:
        return 1
    if base == -1:
        return -1 if e % 2 else 1
    if e > cap:
        raise ResourceLimit(f"exponent {e} exceeds cap {cap}")
    if e * (abs(base).bit_length() - 1) > bit_cap:
        raise ResourceLimit(f"{base}^{e} exceeds {bit_cap} bits")
    return base ** e


def eia_pow_equals(value: int, base: int, exponent: int,
                   cap: int = DEFAULT_EXP_CAP) -> bool:
    """Decide ``value == base ** abs(exponent)``, avoiding huge powers when possible."""
    e = abs(exponent)
    if abs(base) >= 2 and e > 0:
        # 2^(k-1) <= |base| < 2^k bounds the bit length of |base|^e
        k = abs(base).bit_length()
        if not e * (k - 1) < abs(value).bit_length() <= e * k:
            return False
        if (value < 0) != (base < 0 and e % 2 == 1):
            return False
    return value == eia_pow(base, e, cap)


Value = int | bool


class Evaluator:
    """Evaluate terms under an assignment.

    Without ``exp_values`` every ``exp`` node gets its EIA meaning.  With
    ``exp_values`` the given map is used instead, which is how a backend
    model (where ``exp`` is uninterpreted) is replayed.
    """

    def __init__(self, assignment: Mapping[str, Value],
                 exp_values: Mapping[Term, int] | None = None,
                 cap: int = DEFAULT_EXP_CAP):
        self.assignment = assignment
        self.exp_values = exp_values
        self.cap = cap
        self._memo: dict[Term, Value] = {}

    def __call__(self, t: Term) -> Value:
        memo = self._memo
        if t in memo:
            return memo[t]
        for node in iter_dag(t):
            if node not in memo:
                memo[node] = self._node(node, memo)
        return memo[t]

    def _node(self, t: Term, memo: dict[Term, Value]) -> Value:
        op = t.op
        if op == "const":
            return t.value  # type: ignore[return-value]
        if op == "var":
            try:
                v = self.assignment[t.value]  # type: ignore[index]
            except KeyError:
                raise UnboundVariable(t.value) from None  # type: ignore[arg-type]
            return bool(v) if t.sort is BOOL else int(v)
        if op == "true":
            return True
        if op == "false":
            return False
        a = [memo[x] for x in t.args]
        if op == "exp":
            if self.exp_values is not None:
                try:
                    return self.exp_values[t]
                except KeyError:
                    raise InternalError(f"model has no value for {t}") from None
            return eia_pow(a[0], a[1], self.cap)
        if op == "+":
            return sum(a)
        if op == "-":
            r = a[0]
            for x in a[1:]:
                r -= x
            return r
        if op == "*":
            r = 1
            for x in a:
                r *= x
            return r
        if op == "div":
            return smt_div(a[0], a[1])
        if op == "mod":
            return smt_mod(a[0], a[1])
        if op == "<":
            return a[0] < a[1]
        if op == "<=":
            return a[0] <= a[1]
        if op == ">":
            return a[0] > a[1]
        if op == ">=":
            return a[0] >= a[1]
        if op == "=":
            return a[0] == a[1]
        if op == "distinct":
            return a[0] != a[1]
        if op == "not":
            return not a[0]
        if op == "and":
            return all(a)
        if op == "or":
            return any(a)
        if op == "=>":
            return (not a[0]) or a[1]
        if op == "ite":
            return a[1] if a[0] else a[2]
        raise InternalError(f"cannot evaluate operator {op!r}")


def eval_eia(t: Term, assignment: Mapping[str, Value] | None = None,
             cap: int = DEFAULT_EXP_CAP) -> Value:
    """Value of ``t`` in exponential integer arithmetic under ``assignment``."""
    return Evaluator(assignment or {}, cap=cap)(t)
