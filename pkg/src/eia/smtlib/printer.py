"""Render terms and scripts as SMT-LIB v2 text."""

from __future__ import annotations

import re

from ..terms import Term, iter_dag
from ..numerals import to_decimal
from . import script as S

_SIMPLE_SYMBOL = re.compile(r"[A-Za-z~!@$%^&*_+=<>.?/\-][0-9A-Za-z~!@$%^&*_+=<>.?/\-]*\Z")
RESERVED = frozenset({
    "par", "NUMERAL", "DECIMAL", "STRING", "_", "!", "as", "let", "exists",
    "forall", "match", "true", "false", "exp",
})


def quote_symbol(name: str) -> str:
    if _SIMPLE_SYMBOL.match(name) and name not in RESERVED:
        return name
    if "|" in name or "\\" in name:
        raise ValueError(f"symbol {name!r} cannot be written in SMT-LIB")
    return f"|{name}|"


def print_term(t: Term) -> str:
    text: dict[Term, str] = {}
    for node in iter_dag(t):
        op = node.op
        if op == "const":
            v = node.value
            text[node] = to_decimal(v) if v >= 0 else f"(- {to_decimal(-v)})"  # type: ignore[operator]
        elif op == "var":
            text[node] = quote_symbol(node.value)  # type: ignore[arg-type]
        elif op in ("true", "false"):
            text[node] = op
        else:
            text[node] = "(" + " ".join([op, *(text[a] for a in node.args)]) + ")"
    return text[t]


def print_command(cmd: S.Command) -> str:
    if isinstance(cmd, S.SetLogic):
        return f"(set-logic {cmd.logic})"
    if isinstance(cmd, S.SetOption):
        return f"({cmd.kind} {cmd.keyword} {cmd.value})".replace(" )", ")")
    if isinstance(cmd, S.DeclareConst):
        return f"(declare-fun {quote_symbol(cmd.var.name)} () {cmd.var.sort})"
    if isinstance(cmd, S.DeclareExp):
        return "(declare-fun exp (Int Int) Int)"
    if isinstance(cmd, S.Assert):
        return f"(assert {print_term(cmd.term)})"
    if isinstance(cmd, S.CheckSat):
        return "(check-sat)"
    if isinstance(cmd, S.GetModel):
        return "(get-model)"
    if isinstance(cmd, S.GetValue):
        return "(get-value (" + " ".join(print_term(t) for t in cmd.terms) + "))"
    if isinstance(cmd, S.Push):
        return f"(push {cmd.levels})"
    if isinstance(cmd, S.Pop):
        return f"(pop {cmd.levels})"
    if isinstance(cmd, S.Exit):
        return "(exit)"
    raise TypeError(f"unknown command {cmd!r}")


def print_script(script: S.Script) -> str:
    return "".join(print_command(c) + "\n" for c in script.commands)
