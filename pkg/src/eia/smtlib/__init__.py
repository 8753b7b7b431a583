"""SMT-LIB v2 frontend: parsing scripts that use ``exp`` and printing terms."""

from .parser import parse, parse_term
from .printer import print_script, print_term, quote_symbol
from .script import (
    Assert,
    CheckSat,
    Command,
    DeclareConst,
    DeclareExp,
    Exit,
    GetModel,
    GetValue,
    Pop,
    Push,
    Script,
    SetLogic,
    SetOption,
)

__all__ = [
    "Assert", "CheckSat", "Command", "DeclareConst", "DeclareExp", "Exit",
    "GetModel", "GetValue", "Pop", "Push", "Script", "SetLogic", "SetOption",
    "parse", "parse_term", "print_script", "print_term", "quote_symbol",
]
