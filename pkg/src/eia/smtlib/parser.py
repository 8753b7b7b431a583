"""SMT-LIB v2 script parser with support for the ``exp`` symbol.

Only the fragment needed for quantifier-free integer arithmetic is accepted.
Everything else is rejected with :class:`UnsupportedFeature`; malformed input
raises :class:`SmtSyntaxError` and ill-sorted terms :class:`SortError`.  All
three carry line/column information where available.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Union

from .. import terms as T
from ..numerals import from_decimal
from ..errors import EiaError, ParseError, SmtSyntaxError, SortError, UnsupportedFeature
from ..terms import BOOL, INT, Sort, Term
from . import script as S

log = logging.getLogger(__name__)

KNOWN_LOGICS = frozenset({"QF_NIA", "QF_UFNIA", "QF_EIA", "ALL", "QF_LIA", "QF_UFLIA"})


@dataclass(frozen=True)
class Atom:
    text: str
    kind: str  # "symbol", "qsymbol", "numeral", "decimal", "string", "keyword", "other"
    line: int
    col: int


@dataclass
class SList:
    items: list["SExpr"]
    line: int
    col: int


SExpr = Union[Atom, SList]


# -- lexing --------------------------------------------------------------------

_DELIMS = set("()\";| \t\r\n")


def _tokens(text: str):
    i, n = 0, len(text)
    line, col = 1, 1

    def advance(k: int):
        nonlocal i, line, col
        for ch in text[i:i + k]:
            if ch == "\n":
                line += 1
                col = 1
            else:
                col += 1
        i += k

    while i < n:
        ch = text[i]
        if ch in " \t\r\n":
            advance(1)
        elif ch == ";":
            j = text.find("\n", i)
            advance((n if j < 0 else j) - i)
        elif ch in "()":
            yield ch, line, col
            advance(1)
        elif ch == '"':
            j = i + 1
            while True:
                j = text.find('"', j)
                if j < 0:
                    raise SmtSyntaxError("unterminated string literal", line, col)
                if j + 1 < n and text[j + 1] == '"':
                    j += 2
                    continue
                break
            yield Atom(text[i:j + 1], "string", line, col), line, col
            advance(j + 1 - i)
        elif ch == "|":
            j = text.find("|", i + 1)
            if j < 0:
                raise SmtSyntaxError("unterminated quoted symbol", line, col)
            body = text[i + 1:j]
            if "\\" in body:
                raise SmtSyntaxError("backslash in quoted symbol", line, col)
            yield Atom(body, "qsymbol", line, col), line, col
            advance(j + 1 - i)
        else:
            j = i
            while j < n and text[j] not in _DELIMS:
                j += 1
            word = text[i:j]
            if word.isdigit() and word.isascii():
                kind = "numeral"
                if len(word) > 1 and word[0] == "0":
                    raise SmtSyntaxError(f"numeral with leading zero: {word}", line, col)
            elif word[0] == ":":
                kind = "keyword"
            elif word[0].isdigit():
                kind = "decimal" if _is_decimal(word) else "other"
            elif word[0] == "#":
                kind = "other"
            else:
                kind = "symbol"
            if kind == "other":
                raise SmtSyntaxError(f"malformed token {word!r}", line, col)
            yield Atom(word, kind, line, col), line, col
            advance(j - i)


def _is_decimal(word: str) -> bool:
    head, _, tail = word.partition(".")
    return head.isdigit() and tail.isdigit()


def read_sexprs(text: str) -> list[SExpr]:
    """Split ``text`` into top-level s-expressions (iteratively, no recursion)."""
    top: list[SExpr] = []
    stack: list[SList] = []
    for tok, line, col in _tokens(text):
        if tok == "(":
            stack.append(SList([], line, col))
        elif tok == ")":
            if not stack:
                raise SmtSyntaxError("unbalanced ')'", line, col)
            done = stack.pop()
            (stack[-1].items if stack else top).append(done)
        else:
            (stack[-1].items if stack else top).append(tok)
    if stack:
        raise SmtSyntaxError("unbalanced '('", stack[-1].line, stack[-1].col)
    return top


# -- terms ---------------------------------------------------------------------

def _pos(e: SExpr) -> tuple[int, int]:
    return e.line, e.col


def _symbol(e: SExpr, what: str = "symbol") -> str:
    if isinstance(e, Atom) and e.kind in ("symbol", "qsymbol"):
        return e.text
    raise SmtSyntaxError(f"expected {what}", *_pos(e))


def _sort(e: SExpr) -> Sort:
    if isinstance(e, Atom) and e.kind == "symbol":
        if e.text == "Int":
            return INT
        if e.text == "Bool":
            return BOOL
    text = e.text if isinstance(e, Atom) else "(...)"
    raise UnsupportedFeature(f"unsupported sort {text}", *_pos(e))


class _Macro:
    def __init__(self, params: list[Term], body: Term):
        self.params = params
        self.body = body


_CHAINABLE = {"<", "<=", ">", ">="}


class _Env:
    """Declarations and macro definitions, scoped by push/pop."""

    def __init__(self):
        self.frames: list[dict[str, Union[Term, _Macro]]] = [{}]
        self.exp_declared = False

    def lookup(self, name: str):
        for frame in reversed(self.frames):
            if name in frame:
                return frame[name]
        return None

    def bind(self, name: str, value, e: SExpr):
        if self.lookup(name) is not None:
            raise SortError(f"symbol {name!r} already declared", *_pos(e))
        self.frames[-1][name] = value


class _TermBuilder:
    def __init__(self, env: _Env):
        self.env = env

    def build(self, e: SExpr, scope: dict[str, Term] | None = None) -> Term:
        try:
            return self._build(e, scope or {})
        except RecursionError:
            raise SmtSyntaxError("term nesting too deep", *_pos(e)) from None

    def _build(self, e: SExpr, scope: dict[str, Term]) -> Term:
        if isinstance(e, Atom):
            return self._atom(e, scope)
        if not e.items:
            raise SmtSyntaxError("empty application", *_pos(e))
        head = e.items[0]
        if isinstance(head, SList):
            return self._indexed(head, e, scope)
        if head.kind != "symbol":
            if head.kind == "qsymbol":
                raise UnsupportedFeature(f"uninterpreted function {head.text!r}", *_pos(head))
            raise SmtSyntaxError("expected function symbol", *_pos(head))
        name = head.text
        if name in ("forall", "exists"):
            raise UnsupportedFeature("quantifiers are not supported", *_pos(e))
        if name == "let":
            return self._let(e, scope)
        if name == "!":
            if len(e.items) < 2:
                raise SmtSyntaxError("annotation without term", *_pos(e))
            return self._build(e.items[1], scope)
        if name in ("as", "match", "_"):
            raise UnsupportedFeature(f"{name} is not supported", *_pos(e))
        args = [self._build(a, scope) for a in e.items[1:]]
        try:
            return self._apply(name, args, e)
        except ParseError:
            raise
        except EiaError as exc:
            raise SortError(str(exc), *_pos(e)) from None

    def _atom(self, e: Atom, scope: dict[str, Term]) -> Term:
        if e.kind == "numeral":
            return T.Int(from_decimal(e.text))
        if e.kind == "decimal":
            raise UnsupportedFeature("real-valued constants are not supported", *_pos(e))
        if e.kind == "symbol" and e.text in ("true", "false"):
            return T.BoolConst(e.text == "true")
        if e.kind in ("symbol", "qsymbol"):
            if e.text in scope:
                return scope[e.text]
            found = self.env.lookup(e.text)
            if isinstance(found, Term):
                return found
            if isinstance(found, _Macro):
                if found.params:
                    raise SortError(f"{e.text} expects arguments", *_pos(e))
                return found.body
            raise SortError(f"unknown symbol {e.text!r}", *_pos(e))
        raise SmtSyntaxError(f"unexpected {e.kind} {e.text!r}", *_pos(e))

    def _let(self, e: SList, scope: dict[str, Term]) -> Term:
        if len(e.items) != 3 or not isinstance(e.items[1], SList):
            raise SmtSyntaxError("malformed let", *_pos(e))
        inner = dict(scope)
        for b in e.items[1].items:
            if not isinstance(b, SList) or len(b.items) != 2:
                raise SmtSyntaxError("malformed let binding", *_pos(b))
            inner[_symbol(b.items[0])] = self._build(b.items[1], scope)
        return self._build(e.items[2], inner)

    def _indexed(self, head: SList, e: SList, scope: dict[str, Term]) -> Term:
        items = head.items
        if (len(items) == 3 and isinstance(items[0], Atom) and items[0].text == "_"
                and isinstance(items[1], Atom) and items[1].text == "divisible"
                and isinstance(items[2], Atom) and items[2].kind == "numeral"):
            c = int(items[2].text)
            if c <= 0:
                raise SortError("divisible expects a positive index", *_pos(head))
            if len(e.items) != 2:
                raise SortError("divisible expects one argument", *_pos(e))
            arg = self._build(e.items[1], scope)
            if arg.sort is not INT:
                raise SortError("divisible expects an Int argument", *_pos(e))
            return T.eq(T.mod(arg, T.Int(c)), T.ZERO)
        raise UnsupportedFeature("indexed function symbols other than divisible", *_pos(head))

    def _apply(self, name: str, args: list[Term], e: SList) -> Term:
        n = len(args)
        if name == "exp":
            if n != 2:
                raise SortError("exp expects two arguments", *_pos(e))
            return T.exp(*args)
        if name == "-":
            if n == 1:
                return T.neg(args[0])
            return T.mk("-", *args)
        if name in ("+", "*"):
            if n == 1:
                if args[0].sort is not INT:
                    raise SortError(f"{name} expects Int arguments", *_pos(e))
                return args[0]
            return T.mk(name, *args)
        if name in ("div", "mod"):
            if n < 2:
                raise SortError(f"{name} expects two arguments", *_pos(e))
            if name == "mod" and n != 2:
                raise SortError("mod expects two arguments", *_pos(e))
            r = args[0]
            for a in args[1:]:
                r = T.mk(name, r, a)
            return r
        if name == "abs":
            if n != 1:
                raise SortError("abs expects one argument", *_pos(e))
            x = args[0]
            return T.ite(T.ge(x, T.ZERO), x, T.neg(x))
        if name in _CHAINABLE or name == "=":
            if n < 2:
                raise SortError(f"{name} expects at least two arguments", *_pos(e))
            return T.and_(*(T.mk(name, a, b) for a, b in zip(args, args[1:])))
        if name == "distinct":
            if n < 2:
                raise SortError("distinct expects at least two arguments", *_pos(e))
            return T.and_(*(T.mk("distinct", args[i], args[j])
                            for i in range(n) for j in range(i + 1, n)))
        if name in ("and", "or"):
            if n == 0:
                raise SortError(f"{name} expects arguments", *_pos(e))
            if n == 1:
                if args[0].sort is not BOOL:
                    raise SortError(f"{name} expects Bool arguments", *_pos(e))
                return args[0]
            return T.mk(name, *args)
        if name == "not":
            return T.mk("not", *args)
        if name == "=>":
            if n < 2:
                raise SortError("=> expects at least two arguments", *_pos(e))
            r = args[-1]
            for a in reversed(args[:-1]):
                r = T.mk("=>", a, r)
            return r
        if name == "xor":
            if n < 2:
                raise SortError("xor expects at least two arguments", *_pos(e))
            r = args[0]
            for a in args[1:]:
                r = T.not_(T.mk("=", r, a))
            return r
        if name == "ite":
            return T.mk("ite", *args)
        found = self.env.lookup(name)
        if isinstance(found, _Macro):
            if len(found.params) != n:
                raise SortError(f"{name} expects {len(found.params)} arguments", *_pos(e))
            for p, a in zip(found.params, args):
                if p.sort is not a.sort:
                    raise SortError(f"ill-sorted argument to {name}", *_pos(e))
            return T.substitute(found.body, dict(zip(found.params, args)))
        if isinstance(found, Term):
            raise SortError(f"{name} is a constant, not a function", *_pos(e))
        raise UnsupportedFeature(f"unknown function symbol {name!r}", *_pos(e))


# -- commands ------------------------------------------------------------------

class _ScriptParser:
    def __init__(self):
        self.env = _Env()
        self.terms = _TermBuilder(self.env)
        self.commands: list[S.Command] = []

    def command(self, e: SExpr):
        if not isinstance(e, SList) or not e.items:
            raise SmtSyntaxError("expected a command", *_pos(e))
        head = e.items[0]
        if not isinstance(head, Atom) or head.kind != "symbol":
            raise SmtSyntaxError("expected a command name", *_pos(e))
        name, args = head.text, e.items[1:]
        handler = getattr(self, "cmd_" + name.replace("-", "_"), None)
        if handler is None:
            raise UnsupportedFeature(f"command {name} is not supported", *_pos(e))
        handler(e, args)

    def _arity(self, e: SList, args: list[SExpr], *counts: int):
        if len(args) not in counts:
            raise SmtSyntaxError(f"wrong number of arguments to {e.items[0].text}", *_pos(e))

    def cmd_set_logic(self, e, args):
        self._arity(e, args, 1)
        logic = _symbol(args[0], "logic name")
        if logic not in KNOWN_LOGICS:
            log.warning("logic %s is not one of %s; continuing anyway",
                        logic, ", ".join(sorted(KNOWN_LOGICS)))
        self.commands.append(S.SetLogic(logic))

    def _ignored(self, kind: str, e, args):
        if not args or not isinstance(args[0], Atom):
            raise SmtSyntaxError(f"malformed {kind}", *_pos(e))
        value = " ".join(a.text if isinstance(a, Atom) else "(...)" for a in args[1:])
        self.commands.append(S.SetOption(args[0].text, value, kind))

    def cmd_set_option(self, e, args):
        self._ignored("set-option", e, args)

    def cmd_set_info(self, e, args):
        self._ignored("set-info", e, args)

    def cmd_get_info(self, e, args):
        self._ignored("get-info", e, args)

    def _declare(self, e, name: str, params: list[SExpr], result: SExpr):
        if name == "exp":
            sorts = [_sort(p) for p in params] if all(isinstance(p, Atom) for p in params) else None
            if sorts != [INT, INT] or _sort(result) is not INT:
                raise SortError("exp is reserved with rank (Int Int) Int", *_pos(e))
            if not self.env.exp_declared:
                self.env.exp_declared = True
                self.commands.append(S.DeclareExp())
            return
        if params:
            raise UnsupportedFeature(
                f"uninterpreted function {name!r}: only exp may take arguments", *_pos(e))
        var = T.Var(name, _sort(result))
        self.env.bind(name, var, e)
        self.commands.append(S.DeclareConst(var))

    def cmd_declare_fun(self, e, args):
        self._arity(e, args, 3)
        if not isinstance(args[1], SList):
            raise SmtSyntaxError("expected parameter sort list", *_pos(args[1]))
        self._declare(e, _symbol(args[0]), args[1].items, args[2])

    def cmd_declare_const(self, e, args):
        self._arity(e, args, 2)
        self._declare(e, _symbol(args[0]), [], args[1])

    def cmd_declare_sort(self, e, args):
        raise UnsupportedFeature("user-defined sorts are not supported", *_pos(e))

    cmd_define_sort = cmd_declare_sort

    def cmd_define_fun(self, e, args):
        self._arity(e, args, 4)
        name = _symbol(args[0])
        if name == "exp":
            raise SortError("exp is reserved and cannot be defined", *_pos(e))
        if not isinstance(args[1], SList):
            raise SmtSyntaxError("expected parameter list", *_pos(args[1]))
        params, scope = [], {}
        for i, p in enumerate(args[1].items):
            if not isinstance(p, SList) or len(p.items) != 2:
                raise SmtSyntaxError("malformed parameter", *_pos(p))
            pname = _symbol(p.items[0])
            pvar = T.Var(f" {name} {i}", _sort(p.items[1]))
            params.append(pvar)
            scope[pname] = pvar
        result = _sort(args[2])
        body = self.terms.build(args[3], scope)
        if body.sort is not result:
            raise SortError(f"body of {name} has sort {body.sort}, expected {result}", *_pos(e))
        self.env.bind(name, _Macro(params, body), e)

    def cmd_define_const(self, e, args):
        self._arity(e, args, 3)
        self.cmd_define_fun(e, [args[0], SList([], e.line, e.col), args[1], args[2]])

    def cmd_assert(self, e, args):
        self._arity(e, args, 1)
        t = self.terms.build(args[0])
        if t.sort is not BOOL:
            raise SortError("asserted term must be Bool", *_pos(e))
        self.commands.append(S.Assert(t))

    def cmd_check_sat(self, e, args):
        self._arity(e, args, 0)
        self.commands.append(S.CheckSat())

    def cmd_get_model(self, e, args):
        self._arity(e, args, 0)
        self.commands.append(S.GetModel())

    def cmd_get_value(self, e, args):
        self._arity(e, args, 1)
        if not isinstance(args[0], SList) or not args[0].items:
            raise SmtSyntaxError("get-value expects a non-empty term list", *_pos(e))
        self.commands.append(S.GetValue(tuple(self.terms.build(a) for a in args[0].items)))

    def _levels(self, e, args) -> int:
        self._arity(e, args, 0, 1)
        if not args:
            return 1
        if not isinstance(args[0], Atom) or args[0].kind != "numeral":
            raise SmtSyntaxError("expected a numeral", *_pos(args[0]))
        return int(args[0].text)

    def cmd_push(self, e, args):
        n = self._levels(e, args)
        self.env.frames.extend({} for _ in range(n))
        self.commands.append(S.Push(n))

    def cmd_pop(self, e, args):
        n = self._levels(e, args)
        if n >= len(self.env.frames):
            raise SmtSyntaxError("pop without matching push", *_pos(e))
        del self.env.frames[len(self.env.frames) - n:]
        self.commands.append(S.Pop(n))

    def cmd_exit(self, e, args):
        self._arity(e, args, 0)
        self.commands.append(S.Exit())

    def cmd_echo(self, e, args):
        self._ignored("echo", e, [Atom("", "string", e.line, e.col), *args])


def _decode(text: Union[str, bytes]) -> str:
    if isinstance(text, (bytes, bytearray)):
        try:
            return bytes(text).decode("utf-8")
        except UnicodeDecodeError as exc:
            raise SmtSyntaxError(f"input is not valid UTF-8 ({exc.reason})") from None
    return text


def parse(text: Union[str, bytes]) -> S.Script:
    """Parse an SMT-LIB v2 script."""
    parser = _ScriptParser()
    for e in read_sexprs(_decode(text)):
        parser.command(e)
    return S.Script(parser.commands)


def parse_term(text: str, declarations: dict[str, Sort] | None = None) -> Term:
    """Parse a single term; undeclared symbols default to Int variables."""
    exprs = read_sexprs(_decode(text))
    if len(exprs) != 1:
        raise SmtSyntaxError("expected exactly one term")
    env = _Env()
    names = dict(declarations or {})
    if declarations is None:
        names.update((a.text, INT) for a in _atoms(exprs[0])
                     if a.kind in ("symbol", "qsymbol") and a.text not in ("true", "false"))
    for name, sort in names.items():
        env.frames[0][name] = T.Var(name, sort)
    return _TermBuilder(env).build(exprs[0])


def _atoms(e: SExpr):
    stack = [e]
    while stack:
        x = stack.pop()
        if isinstance(x, Atom):
            yield x
        else:
            # the head of an application is a function symbol, not a variable
            stack.extend(x.items[1:] if x.items and isinstance(x.items[0], Atom) else x.items)
