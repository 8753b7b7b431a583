from __future__ import annotations

from dataclasses import dataclass, field

from ..terms import Term


class Command:
    """Base class of parsed script commands."""


@dataclass(frozen=True)
class SetLogic(Command):
    logic: str


@dataclass(frozen=True)
class SetOption(Command):
    """set-option / set-info and other commands we accept but ignore."""
    keyword: str
    value: str = ""
    kind: str = "set-option"


@dataclass(frozen=True)
class DeclareConst(Command):
    var: Term


@dataclass(frozen=True)
class DeclareExp(Command):
    """An explicit ``(declare-fun exp (Int Int) Int)``."""


@dataclass(frozen=True)
class Assert(Command):
    term: Term


@dataclass(frozen=True)
class CheckSat(Command):
    pass


@dataclass(frozen=True)
class GetModel(Command):
    pass


@dataclass(frozen=True)
class GetValue(Command):
    terms: tuple[Term, ...]


@dataclass(frozen=True)
class Push(Command):
    levels: int = 1


@dataclass(frozen=True)
class Pop(Command):
    levels: int = 1


@dataclass(frozen=True)
class Exit(Command):
    pass


@dataclass
class Script:
    commands: list[Command] = field(default_factory=list)

    @property
    def logic(self) -> str | None:
        for c in self.commands:
            if isinstance(c, SetLogic):
                return c.logic
        return None

    def assertions(self) -> list[Term]:
        """Asserted terms, ignoring push/pop structure."""
        return [c.term for c in self.commands if isinstance(c, Assert)]

    def declared(self) -> list[Term]:
        return [c.var for c in self.commands if isinstance(c, DeclareConst)]

    def __len__(self) -> int:
        return len(self.commands)
