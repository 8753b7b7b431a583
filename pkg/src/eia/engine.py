"""Counterexample-guided abstraction refinement for EIA.

The backend sees ``exp`` as an uninterpreted function.  Whenever its model
disagrees with real exponentiation on some exp application, lemmas violated
by that model are added and the backend is asked again.
"""

from __future__ import annotations

import logging
import time
from collections import Counter
from dataclasses import dataclass, field, replace
from typing import Optional

from . import terms as T
from .backend import BackendSession, BackendSpec
from .errors import (BackendError, BackendTimeout, EiaError, InternalError, PopOnEmptyStack,
                     ResourceLimit, ValueUnavailable)
from .lemmas import PRECEDENCE, InterpolationHistory, Kind, Lemma, refine, relevant_terms
from .model import ModelView, detect_counterexample
from .preprocess import DEFAULT_POWER_CAP, preprocess
from .terms import DEFAULT_EXP_CAP, Term

log = logging.getLogger(__name__)

SAT, UNSAT, UNKNOWN = "sat", "unsat", "unknown"

# reasons attached to an unknown verdict
TIMEOUT = "timeout"
ITERATION_LIMIT = "iteration-limit"
RESOURCE_LIMIT = "resource-limit"
BACKEND_UNKNOWN = "backend-unknown"
INTERNAL = "internal"
NO_PROGRESS = "no-progress"

DEF_PREFIX = "__eia_def_"

_SWITCHES = {
    "rewriting": "rewriting",
    "constant-folding": "constant_folding",
    "symmetry": "symmetry",
    "monotonicity": "monotonicity",
    "bounding": "bounding",
    "interpolation": "interpolation",
}


@dataclass(frozen=True)
class SolveConfig:
    backend: str = "z3"
    timeout: float = 10.0
    max_iterations: int = 200
    rewriting: bool = True
    constant_folding: bool = True
    symmetry: bool = True
    monotonicity: bool = True
    bounding: bool = True
    interpolation: bool = True
    validate_sat: bool = False
    validate_unsat: Optional[int] = None
    exp_cap: int = DEFAULT_EXP_CAP
    power_cap: int = DEFAULT_POWER_CAP
    value_fallback: bool = True

    def __post_init__(self):
        if not self.timeout > 0:
            raise ValueError("timeout must be positive")
        if self.max_iterations <= 0:
            raise ValueError("max_iterations must be positive")

    @property
    def lemma_kinds(self) -> tuple[Kind, ...]:
        flags = {Kind.SYMMETRY: self.symmetry, Kind.MONOTONICITY: self.monotonicity,
                 Kind.BOUNDING: self.bounding, Kind.INTERPOLATION: self.interpolation}
        return tuple(k for k in PRECEDENCE if flags[k])

    def without(self, *features: str) -> SolveConfig:
        """A copy with the named features (``"symmetry"``, ``"rewriting"``, ...) off."""
        return replace(self, **{_SWITCHES[f]: False for f in features})

    def without_lemmas(self) -> SolveConfig:
        return self.without("symmetry", "monotonicity", "bounding", "interpolation")


@dataclass
class SolveStats:
    iterations: int = 0
    checks: int = 0
    lemmas: Counter = field(default_factory=Counter)
    backend_time: float = 0.0
    total_time: float = 0.0

    def lemma_count(self, kind: Kind) -> int:
        return self.lemmas.get(kind, 0)

    def render(self) -> list[str]:
        lines = [f"iterations {self.iterations}", f"backend-checks {self.checks}"]
        lines += [f"lemmas-{k.value} {self.lemma_count(k)}" for k in PRECEDENCE]
        lines += [f"backend-time {self.backend_time:.3f}", f"total-time {self.total_time:.3f}"]
        return lines


@dataclass
class SolveResult:
    verdict: str
    reason: Optional[str] = None
    model: Optional[ModelView] = None
    stats: SolveStats = field(default_factory=SolveStats)
    validation: Optional[object] = None  # a ValidationReport when requested

    def __str__(self) -> str:
        return self.verdict


class Session:
    """Incremental solving: assertions live in push/pop frames, learned lemmas
    survive pops (they are EIA-valid)."""

    def __init__(self, config: SolveConfig | None = None):
        self.config = config or SolveConfig()
        self.spec = BackendSpec.resolve(self.config.backend)
        self._frames: list[list[tuple[Term, Term]]] = [[]]  # (original, preprocessed)
        self.lemmas: list[Lemma] = []
        self._known: set[Term] = set()
        self._defs: dict[Term, Term] = {}
        self.history = InterpolationHistory()
        self.stats = SolveStats()
        self._backend: BackendSession | None = None
        self._model: ModelView | None = None

    # -- assertion stack ---------------------------------------------------------

    def add_assertion(self, phi: Term) -> None:
        if phi.sort is not T.BOOL:
            raise TypeError("assertions must be Boolean")
        cfg = self.config
        try:
            pre = preprocess(phi, cfg.rewriting, cfg.constant_folding,
                             power_cap=cfg.power_cap, cap=cfg.exp_cap)
        except ResourceLimit:
            pre = phi
        self._frames[-1].append((phi, pre))

    def push(self, levels: int = 1) -> None:
        for _ in range(levels):
            self._frames.append([])

    def pop(self, levels: int = 1) -> None:
        if levels > len(self._frames) - 1:
            raise PopOnEmptyStack(f"cannot pop {levels} level(s) from depth {len(self._frames) - 1}")
        del self._frames[len(self._frames) - levels:]

    @property
    def depth(self) -> int:
        return len(self._frames) - 1

    def assertions(self) -> list[Term]:
        """The original (unpreprocessed) assertions of all open frames."""
        return [orig for frame in self._frames for orig, _ in frame]

    def _current(self) -> list[Term]:
        return [pre for frame in self._frames for _, pre in frame]

    # -- solving -------------------------------------------------------------------

    def _session(self, deadline: float) -> BackendSession:
        if self._backend is None:
            self._backend = BackendSession(self.spec, deadline)
        self._backend.deadline = deadline
        return self._backend

    def _drop_backend(self) -> None:
        if self._backend is not None:
            self._backend.kill()
            try:
                self._backend.close()
            except OSError:
                pass
            self._backend = None

    def _wire(self, formulas: list[Term]) -> list[Term]:
        return formulas + [T.eq(v, e) for e, v in self._defs.items()]

    def _query_model(self, backend: BackendSession, formulas: list[Term]) -> ModelView | None:
        """Values for every variable and every relevant exp application.

        Returns None if adding fallback definitions changed the backend
        answer (which can only be ``unknown``).
        """
        variables = T.free_vars(*formulas, *self.assertions())
        variables = [v for v in variables if not v.name.startswith(DEF_PREFIX)]
        exps = list(dict.fromkeys(
            T.subterms_exp(*formulas)
            + [e for r in relevant_terms(*formulas) for e in r.variants]))
        while True:
            query = variables + [self._defs.get(e, e) for e in exps]
            try:
                values = backend.values(query)
                break
            except ValueUnavailable:
                if not self.config.value_fallback or all(e in self._defs for e in exps):
                    raise
                for e in exps:
                    if e not in self._defs:
                        self._defs[e] = T.Var(f"{DEF_PREFIX}{len(self._defs)}")
                answer = backend.check(self._wire(formulas))
                if answer != SAT:
                    return None
        assignment = {v.name: values[v] for v in variables}
        exp_values = {e: values[self._defs.get(e, e)] for e in exps}
        return ModelView(assignment, exp_values, self.config.exp_cap)

    def check(self) -> SolveResult:
        cfg = self.config
        start = time.monotonic()
        deadline = start + cfg.timeout
        self.stats = stats = SolveStats()
        self._model = None
        result = self._loop(deadline, stats)
        stats.total_time = time.monotonic() - start
        result.stats = stats
        if result.verdict == SAT:
            self._model = result.model
        self._validate(result)
        return result

    def _loop(self, deadline: float, stats: SolveStats) -> SolveResult:
        cfg = self.config
        base = self._current()
        kinds = cfg.lemma_kinds
        backend = None
        try:
            backend = self._session(deadline)
            checks_before, elapsed_before = backend.checks, backend.elapsed
            while True:
                if time.monotonic() >= deadline:
                    return SolveResult(UNKNOWN, TIMEOUT)
                formulas = base + [lem.formula for lem in self.lemmas]
                answer = backend.check(self._wire(formulas))
                if answer == UNSAT:
                    return SolveResult(UNSAT)
                if answer == UNKNOWN:
                    return SolveResult(UNKNOWN, BACKEND_UNKNOWN)
                model = self._query_model(backend, formulas)
                if model is None:
                    return SolveResult(UNKNOWN, BACKEND_UNKNOWN)
                if not detect_counterexample(T.subterms_exp(*formulas), model):
                    user_vars = {k: v for k, v in model.assignment.items()
                                 if not k.startswith(DEF_PREFIX)}
                    genuine = ModelView(user_vars, model.exp_values, cfg.exp_cap)
                    return SolveResult(SAT, model=genuine)
                if stats.iterations >= cfg.max_iterations:
                    return SolveResult(UNKNOWN, ITERATION_LIMIT)
                new = refine(formulas, model, self.history, kinds, self._known, cfg.exp_cap)
                if not new:
                    if set(kinds) == set(PRECEDENCE):
                        raise InternalError("counterexample without a violated lemma")
                    return SolveResult(UNKNOWN, NO_PROGRESS)
                stats.iterations += 1
                for lem in new:
                    self._known.add(lem.formula)
                    self.lemmas.append(lem)
                    stats.lemmas[lem.kind] += 1
                    log.debug("lemma %s", lem)
        except BackendTimeout:
            self._drop_backend()
            return SolveResult(UNKNOWN, TIMEOUT)
        except ResourceLimit:
            return SolveResult(UNKNOWN, RESOURCE_LIMIT)
        except (BackendError, InternalError) as exc:
            log.warning("solve failed: %s", exc)
            self._drop_backend()
            return SolveResult(UNKNOWN, INTERNAL)
        finally:
            if backend is not None:
                # the backend session accumulates across checks
                stats.checks = backend.checks - checks_before
                stats.backend_time = backend.elapsed - elapsed_before

    def _validate(self, result: SolveResult) -> None:
        from . import validate  # local import: validate depends on the backend, not on us

        cfg = self.config
        phi = T.and_(*self.assertions()) if self.assertions() else T.TRUE
        if result.verdict == SAT and cfg.validate_sat:
            result.validation = validate.validate_sat(phi, result.model, cfg.exp_cap)
        elif result.verdict == UNSAT and cfg.validate_unsat is not None:
            result.validation = validate.validate_unsat(
                phi, cfg.validate_unsat, spec=self.spec, timeout=cfg.timeout)

    def get_model(self) -> ModelView | None:
        return self._model

    def get_stats(self) -> SolveStats:
        return self.stats

    def close(self) -> None:
        if self._backend is not None:
            self._backend.close()
            self._backend = None

    def __enter__(self) -> Session:
        return self

    def __exit__(self, *exc) -> None:
        self.close()


def solve(phi: Term, config: SolveConfig | None = None) -> SolveResult:
    """One-shot solve of a single formula."""
    with Session(config) as session:
        session.add_assertion(phi)
        return session.check()


__all__ = [
    "BACKEND_UNKNOWN", "INTERNAL", "ITERATION_LIMIT", "NO_PROGRESS", "RESOURCE_LIMIT", "SAT",
    "Session", "SolveConfig", "SolveResult", "SolveStats", "TIMEOUT", "UNKNOWN", "UNSAT",
    "EiaError", "solve",
]
