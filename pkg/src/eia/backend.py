"""NIA backend over an SMT-LIB v2 pipe, with ``exp`` left uninterpreted.

Every command is acknowledged (``:print-success``), so the client always
knows how many responses to wait for.  Reads honour a deadline; when it
passes, the subprocess is killed and :class:`BackendTimeout` is raised.
"""

from __future__ import annotations

import os
import select
import shlex
import shutil
import subprocess
import threading
import time
from collections.abc import Iterable, Sequence
from dataclasses import dataclass

from . import terms as T
from .errors import BackendTimeout, ProtocolError, SmtSyntaxError, SpawnFailure, ValueUnavailable
from .numerals import from_decimal
from .smtlib.parser import Atom, SList, read_sexprs
from .smtlib.printer import print_term, quote_symbol
from .terms import Term

ENV_BACKEND = "EIA_SOLVE_BACKEND"

_FAMILY_ARGS = {
    "z3": ["-in", "-smt2"],
    "cvc5": ["--lang=smt2", "--incremental"],
}


@dataclass(frozen=True)
class BackendSpec:
    argv: tuple[str, ...]
    family: str = "generic"  # "z3", "cvc5" or "generic"
    timeout: float | None = None  # per query, seconds

    @classmethod
    def resolve(cls, name: str = "z3", timeout: float | None = None) -> BackendSpec:
        """Build a spec from a solver name or ``cmd:<command line>``.

        ``$EIA_SOLVE_BACKEND`` replaces the executable of a named family.
        """
        if name.startswith("cmd:"):
            argv = shlex.split(name[4:])
            if not argv:
                raise SpawnFailure("empty backend command")
            return cls(tuple(argv), "generic", timeout)
        if name not in _FAMILY_ARGS:
            raise SpawnFailure(f"unknown backend {name!r} (expected z3, cvc5 or cmd:<command>)")
        exe = os.environ.get(ENV_BACKEND) or shutil.which(name) or name
        return cls((exe, *_FAMILY_ARGS[name]), name, timeout)


def total_division(phi: Term) -> Term:
    """Make ``div``/``mod`` by a possibly-zero divisor follow our convention.

    SMT-LIB leaves division by zero unspecified, so a backend may pick any
    value.  ``a div 0 = 0`` and ``a mod 0 = a`` are enforced with an ``ite``.
    """
    memo: dict[Term, Term] = {}
    for node in T.iter_dag(phi):
        if not node.args:
            memo[node] = node
            continue
        u = T.rebuild(node, [memo[a] for a in node.args])
        if u.op in ("div", "mod"):
            a, b = u.args
            if not (b.op == "const" and b.value != 0):
                u = T.ite(T.eq(b, T.ZERO), T.ZERO if u.op == "div" else a, u)
        memo[node] = u
    return memo[phi]


class _ResponseReader:
    """Splits a byte stream into complete top-level s-expressions."""

    def __init__(self):
        self.buf = ""
        self.pos = 0
        self.depth = 0
        self.start: int | None = None
        self.in_string = False
        self.in_quote = False

    def feed(self, text: str) -> list[str]:
        self.buf += text
        out = []
        buf = self.buf
        i = self.pos
        while i < len(buf):
            ch = buf[i]
            if self.in_string:
                if ch == '"':
                    if i + 1 < len(buf) and buf[i + 1] == '"':
                        i += 1
                    elif i + 1 >= len(buf):
                        break  # need the next char to decide
                    else:
                        self.in_string = False
            elif self.in_quote:
                if ch == "|":
                    self.in_quote = False
            elif ch == ";" and self.depth == 0 and self.start is None:
                nl = buf.find("\n", i)
                if nl < 0:
                    break
                i = nl
            elif ch == '"':
                self.in_string = True
                self.start = i if self.start is None else self.start
            elif ch == "|":
                self.in_quote = True
                self.start = i if self.start is None else self.start
            elif ch == "(":
                if self.start is None:
                    self.start = i
                self.depth += 1
            elif ch == ")":
                if self.depth == 0:
                    raise ProtocolError(f"unbalanced ')' from backend: {buf[:200]!r}")
                self.depth -= 1
                if self.depth == 0:
                    out.append(buf[self.start:i + 1])
                    self.start = None
            elif ch.isspace():
                if self.depth == 0 and self.start is not None:
                    out.append(buf[self.start:i])
                    self.start = None
            elif self.start is None:
                self.start = i
            i += 1
        self.pos = i
        if self.start is None and not self.in_string and not self.in_quote:
            self.buf = buf[i:]
            self.pos = 0
        return out


def parse_int_value(e) -> int:
    """An integer literal from a model: ``7`` or ``(- 7)``."""
    if isinstance(e, Atom) and e.kind == "numeral":
        return from_decimal(e.text)
    if (isinstance(e, SList) and len(e.items) == 2 and isinstance(e.items[0], Atom)
            and e.items[0].text == "-"):
        return -parse_int_value(e.items[1])
    raise ProtocolError(f"expected an integer value, got {e!r}")


class BackendSession:
    """One live solver subprocess.

    Assertions are managed declaratively: :meth:`check` receives the full
    list of formulas that should hold.  If the formulas sent so far are a
    prefix of it only the remainder is sent; otherwise the assertion level
    is dropped and everything is sent again.
    """

    def __init__(self, spec: BackendSpec, deadline: float | None = None, record: bool = False):
        self.spec = spec
        self.deadline = deadline
        self.checks = 0
        self.elapsed = 0.0
        self.transcript: list[str] | None = [] if record else None
        self._sent: list[Term] = []
        self._declared: set[str] = set()
        self._reader = _ResponseReader()
        self._pending: list[str] = []
        self._killed = False
        self._lock = threading.Lock()
        try:
            self.proc = subprocess.Popen(
                list(spec.argv), stdin=subprocess.PIPE, stdout=subprocess.PIPE,
                stderr=subprocess.DEVNULL, bufsize=0)
        except OSError as exc:
            raise SpawnFailure(f"cannot start backend {spec.argv[0]!r}: {exc}") from exc
        os.set_blocking(self.proc.stdin.fileno(), False)
        self._preamble()

    # -- wire ------------------------------------------------------------------

    def _write(self, line: str) -> None:
        if self.transcript is not None:
            self.transcript.append(line)
        data = memoryview(line.encode() + b"\n")
        fd = self.proc.stdin.fileno()
        while data:
            self._wait(fd, write=True)
            try:
                n = os.write(fd, data)
            except BlockingIOError:
                continue
            except (BrokenPipeError, OSError, ValueError) as exc:
                raise self._dead(exc) from exc
            data = data[n:]

    def _wait(self, fd: int, write: bool = False) -> None:
        """Block until ``fd`` is ready or the deadline passes."""
        while True:
            timeout = self._remaining()
            if timeout is not None and timeout <= 0:
                self.kill()
                raise BackendTimeout("backend did not respond before the deadline")
            try:
                if write:
                    ready = select.select([], [fd], [], timeout)[1]
                else:
                    ready = select.select([fd], [], [], timeout)[0]
            except (ValueError, OSError) as exc:
                raise self._dead(exc) from exc
            if ready:
                return

    def _dead(self, exc: Exception | None = None) -> Exception:
        if self._killed:
            return BackendTimeout("backend terminated by watchdog")
        return ProtocolError(f"backend exited unexpectedly ({exc or 'EOF'})")

    def _read(self) -> str:
        while not self._pending:
            fd = self.proc.stdout.fileno()
            self._wait(fd)
            try:
                chunk = os.read(fd, 65536)
            except OSError as exc:
                raise self._dead(exc) from exc
            if not chunk:
                raise self._dead()
            self._pending.extend(self._reader.feed(chunk.decode("utf-8", "replace")))
        return self._pending.pop(0)

    def _remaining(self) -> float | None:
        limits = []
        if self.deadline is not None:
            limits.append(self.deadline - time.monotonic())
        if self._query_deadline is not None:
            limits.append(self._query_deadline - time.monotonic())
        return min(limits) if limits else None

    _query_deadline: float | None = None

    def _command(self, line: str) -> str:
        self._write(line)
        return self._read()

    def _expect_success(self, line: str) -> None:
        resp = self._command(line)
        if resp != "success":
            raise ProtocolError(f"{line!r} answered {resp!r}")

    def _preamble(self) -> None:
        self._expect_success("(set-option :print-success true)")
        self._expect_success("(set-option :produce-models true)")
        if self._command("(set-logic QF_UFNIA)") != "success":
            self._expect_success("(set-logic ALL)")
        self._expect_success("(declare-fun exp (Int Int) Int)")
        self._expect_success("(push 1)")

    # -- assertions ------------------------------------------------------------

    def _declare(self, formulas: Iterable[Term]) -> None:
        for v in T.free_vars(*formulas):
            if v.name not in self._declared:
                sort = "Bool" if v.sort is T.BOOL else "Int"
                self._expect_success(f"(declare-fun {quote_symbol(v.name)} () {sort})")
                self._declared.add(v.name)

    def _sync(self, formulas: Sequence[Term]) -> None:
        n = len(self._sent)
        if n > len(formulas) or any(a is not b for a, b in zip(self._sent, formulas)):
            self._expect_success("(pop 1)")
            self._expect_success("(push 1)")
            self._sent = []
            self._declared = set()
            n = 0
        for phi in formulas[n:]:
            self._declare([phi])
            self._expect_success(f"(assert {print_term(total_division(phi))})")
            self._sent.append(phi)

    def check(self, formulas: Sequence[Term]) -> str:
        """``sat``, ``unsat`` or ``unknown`` for the conjunction of ``formulas``."""
        start = time.monotonic()
        with self._lock:
            self._query_deadline = start + self.spec.timeout if self.spec.timeout else None
            try:
                self._sync(list(formulas))
                self.checks += 1
                answer = self._command("(check-sat)")
            finally:
                self._query_deadline = None
                self.elapsed += time.monotonic() - start
        if answer not in ("sat", "unsat", "unknown"):
            raise ProtocolError(f"unexpected check-sat answer {answer!r}")
        return answer

    def values(self, terms: Sequence[Term]) -> dict[Term, int]:
        """Integer values of ``terms`` in the model of the last ``sat`` check."""
        terms = list(dict.fromkeys(terms))
        if not terms:
            return {}
        start = time.monotonic()
        with self._lock:
            try:
                self._declare(terms)
                shown = " ".join(print_term(total_division(t)) for t in terms)
                resp = self._command(f"(get-value ({shown}))")
            finally:
                self.elapsed += time.monotonic() - start
        try:
            parsed = read_sexprs(resp)
        except SmtSyntaxError as exc:
            raise ProtocolError(f"malformed get-value response: {exc}") from exc
        if len(parsed) != 1 or not isinstance(parsed[0], SList):
            raise ProtocolError(f"malformed get-value response {resp[:200]!r}")
        items = parsed[0].items
        if items and isinstance(items[0], Atom) and items[0].text == "error":
            raise ValueUnavailable(resp)
        if len(items) != len(terms) or not all(
                isinstance(p, SList) and len(p.items) == 2 for p in items):
            raise ProtocolError(f"get-value returned {len(items)} pairs for {len(terms)} terms")
        out = {}
        for t, pair in zip(terms, items):
            v = pair.items[1]
            if t.sort is T.BOOL:
                if not (isinstance(v, Atom) and v.text in ("true", "false")):
                    raise ProtocolError(f"expected a Boolean value, got {v!r}")
                out[t] = v.text == "true"
            else:
                out[t] = parse_int_value(v)
        return out

    # -- lifetime ----------------------------------------------------------------

    def kill(self) -> None:
        """Terminate the subprocess; safe to call from any thread."""
        self._killed = True
        try:
            self.proc.kill()
        except OSError:
            pass

    def close(self) -> None:
        if self.proc.poll() is None and not self._killed:
            try:
                os.write(self.proc.stdin.fileno(), b"(exit)\n")
                self.proc.stdin.close()
                self.proc.wait(timeout=1)
            except (OSError, ValueError, subprocess.TimeoutExpired):
                self.proc.kill()
        self.proc.wait()
        self.proc.stdout.close()

    def __enter__(self) -> BackendSession:
        return self

    def __exit__(self, *exc) -> None:
        self.close()


def open_session(spec: BackendSpec, deadline: float | None = None,
                 record: bool = False) -> BackendSession:
    return BackendSession(spec, deadline, record)
