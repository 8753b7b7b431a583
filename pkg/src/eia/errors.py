"""Exception hierarchy shared by all eia modules."""


class EiaError(Exception):
    """Base class for every error raised by this package."""


class ResourceLimit(EiaError):
    """An exponent or constant exceeded the configured size cap."""


class UnboundVariable(EiaError):
    def __init__(self, name: str):
        super().__init__(f"variable {name!r} has no value")
        self.name = name


class ParseError(EiaError):
    """Base class for frontend errors; carries an optional source position."""

    def __init__(self, message: str, line: int | None = None, column: int | None = None):
        self.message = message
        self.line = line
        self.column = column
        if line is not None:
            message = f"{line}:{column}: {message}"
        super().__init__(message)


class SmtSyntaxError(ParseError):
    """Malformed s-expression or command."""


class SortError(ParseError):
    """Ill-sorted term, or a declaration clashing with a reserved symbol."""


class UnsupportedFeature(ParseError):
    """Quantifiers, foreign sorts, or uninterpreted functions other than exp."""


class BackendError(EiaError):
    pass


class SpawnFailure(BackendError):
    pass


class ProtocolError(BackendError):
    pass


class BackendTimeout(BackendError):
    pass


class ValueUnavailable(BackendError):
    """The backend refused a get-value query."""


class PopOnEmptyStack(EiaError):
    pass


class InternalError(EiaError):
    """An invariant that should be guaranteed by construction was violated."""
