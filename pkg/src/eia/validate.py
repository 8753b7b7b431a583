"""Sanity checks for solver verdicts and a brute-force EIA oracle.

* :func:`validate_sat` evaluates the input under true EIA semantics.
* :func:`validate_unsat` pins every exp argument to small exponents and asks
  the NIA backend; a satisfiable pinned problem is an EIA model.
* :func:`brute_force` enumerates all small assignments without any solver.
"""

from __future__ import annotations

import itertools
import time
from collections.abc import Iterator
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional

from . import terms as T
from .backend import BackendSession, BackendSpec
from .errors import BackendError, BackendTimeout, ResourceLimit
from .model import ModelView
from .terms import DEFAULT_EXP_CAP, Term, eval_eia

CONFIRMED, REFUTED, INCONCLUSIVE = "confirmed", "refuted", "inconclusive"


@dataclass
class ValidationReport:
    verdict: str
    witness: Optional[dict[str, int]] = None
    detail: str = ""
    checks: int = 0

    def __str__(self) -> str:
        return self.verdict


def complete_assignment(phi: Term, assignment: dict[str, T.Value]) -> dict[str, T.Value]:
    """``assignment`` extended with a default value for every missing variable."""
    full = dict(assignment)
    for v in T.free_vars(phi):
        full.setdefault(v.name, False if v.sort is T.BOOL else 0)
    return full


def validate_sat(phi: Term, model: ModelView | dict, cap: int = DEFAULT_EXP_CAP) -> ValidationReport:
    assignment = model.assignment if isinstance(model, ModelView) else model
    full = complete_assignment(phi, assignment)
    try:
        ok = eval_eia(phi, full, cap)
    except ResourceLimit as exc:
        return ValidationReport(INCONCLUSIVE, detail=str(exc))
    if ok:
        return ValidationReport(CONFIRMED, witness=full)
    return ValidationReport(REFUTED, witness=full, detail="formula evaluates to false")


def tuples_by_max_norm(n: int, k: int) -> Iterator[tuple[int, ...]]:
    """All of ``[0..k]^n``, those with smaller maximum first."""
    if n == 0:
        yield ()
        return
    for m in range(k + 1):
        for tup in itertools.product(range(m + 1), repeat=n):
            if max(tup) == m:
                yield tup


def pinned(phi: Term, occurrences: list[Term], values: tuple[int, ...]) -> Term:
    """``phi`` with each ``exp(s_i, t_i)`` forced to ``s_i ** c_i`` and ``t_i = c_i``."""
    pins = []
    for e, c in zip(occurrences, values):
        s, t = e.args
        pins += [T.eq(t, c), T.eq(e, T.power(s, c))]
    return T.and_(phi, *pins) if pins else phi


def _witness(session: BackendSession, phi: Term) -> dict[str, T.Value]:
    variables = T.free_vars(phi)
    values = session.values(variables)
    return {v.name: values[v] for v in variables}


def validate_unsat(phi: Term, k: int = 10, spec: BackendSpec | None = None,
                   timeout: float | None = None, jobs: int = 1) -> ValidationReport:
    """Search for an EIA model whose exponent arguments all lie in ``[0..k]``.

    Refuted carries the model found; confirmed means no model exists within
    the bound; inconclusive means the time budget ran out first.
    """
    spec = spec or BackendSpec.resolve()
    occurrences = T.subterms_exp(phi)
    deadline = time.monotonic() + timeout if timeout else None
    all_tuples = list(tuples_by_max_norm(len(occurrences), k))
    chunks = [all_tuples[i::jobs] for i in range(jobs)] if jobs > 1 else [all_tuples]
    found: list[ValidationReport] = []

    def run(chunk: list[tuple[int, ...]]) -> ValidationReport:
        checks = 0
        try:
            with BackendSession(spec, deadline) as session:
                for tup in chunk:
                    if found:
                        break
                    psi = pinned(phi, occurrences, tup)
                    answer = session.check([psi])
                    checks += 1
                    if answer == "sat":
                        witness = complete_assignment(phi, _witness(session, psi))
                        rep = ValidationReport(REFUTED, witness, f"exponents {tup}", checks)
                        found.append(rep)
                        return rep
                    if answer == "unknown":
                        return ValidationReport(INCONCLUSIVE, None, f"backend unknown at {tup}", checks)
        except BackendTimeout:
            return ValidationReport(INCONCLUSIVE, None, "timeout", checks)
        except BackendError as exc:
            return ValidationReport(INCONCLUSIVE, None, str(exc), checks)
        return ValidationReport(CONFIRMED, None, f"no model with exponents in [0..{k}]", checks)

    if len(chunks) == 1:
        reports = [run(chunks[0])]
    else:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            reports = list(pool.map(run, chunks))
    total = sum(r.checks for r in reports)
    for verdict in (REFUTED, INCONCLUSIVE, CONFIRMED):
        for r in reports:
            if r.verdict == verdict:
                r.checks = total
                return r
    raise AssertionError("unreachable")


@dataclass
class BruteForceResult:
    sat: bool
    witness: Optional[dict[str, int]] = None
    skipped: int = 0  # assignments whose evaluation hit the size cap
    explored: int = field(default=0, repr=False)


def brute_force(phi: Term, bound: int, cap: int = DEFAULT_EXP_CAP) -> BruteForceResult:
    """Evaluate ``phi`` on every assignment in ``[-bound..bound]`` (variables
    in name order, lexicographic) and return the first model found."""
    variables = sorted(T.free_vars(phi), key=lambda v: v.name)
    domains = [(False, True) if v.sort is T.BOOL else range(-bound, bound + 1)
               for v in variables]
    names = [v.name for v in variables]
    skipped = explored = 0
    for values in itertools.product(*domains):
        explored += 1
        sigma = dict(zip(names, values))
        try:
            if eval_eia(phi, sigma, cap):
                return BruteForceResult(True, sigma, skipped, explored)
        except ResourceLimit:
            skipped += 1
    return BruteForceResult(False, None, skipped, explored)
