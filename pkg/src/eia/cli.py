"""``eia-solve``: run an SMT-LIB script over integers with ``exp``.

Exit status: 0 sat, 1 unsat, 2 unknown (of the last check), 3 input error,
4 backend could not be started.
"""

from __future__ import annotations

import argparse
import logging
import shutil
import sys

from . import terms as T
from .backend import ENV_BACKEND
from .engine import SAT, UNKNOWN, UNSAT, Session, SolveConfig, SolveResult
from .errors import EiaError, ParseError, ResourceLimit, SpawnFailure
from .model import ModelView
from .smtlib import parse, print_term, quote_symbol
from .smtlib import script as S
from .validate import complete_assignment

EXIT_CODES = {SAT: 0, UNSAT: 1, UNKNOWN: 2}
EXIT_INPUT_ERROR = 3
EXIT_BACKEND_ERROR = 4


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="eia-solve",
        description="Decide integer arithmetic formulas with exp(c, d) = c^|d|.")
    p.add_argument("file", nargs="?", default="-", help="SMT-LIB v2 script ('-' for stdin)")
    p.add_argument("--solver", default="z3",
                   help=f"backend: z3, cvc5 or cmd:<command line> (${ENV_BACKEND} sets the executable)")
    p.add_argument("--timeout", type=float, default=10.0, help="seconds per check-sat")
    p.add_argument("--max-iterations", type=int, default=200, help="refinement rounds per check-sat")
    p.add_argument("--validate-sat", action="store_true", help="re-evaluate sat models under exp semantics")
    p.add_argument("--validate-unsat", type=int, metavar="K",
                   help="search for models with all exp exponents in [0..K] after unsat")
    for feature in ("rewriting", "constant-folding", "symmetry", "monotonicity",
                    "bounding", "interpolation"):
        p.add_argument(f"--no-{feature}", action="store_true", help=f"disable {feature}")
    p.add_argument("--no-lemmas", action="store_true", help="disable all four lemma kinds")
    p.add_argument("--model", action="store_true", help="print the model after each sat")
    p.add_argument("--stats", action="store_true", help="print solver statistics as comments")
    p.add_argument("-v", "--verbose", action="count", default=0)
    return p


def config_from_args(args: argparse.Namespace) -> SolveConfig:
    cfg = SolveConfig(backend=args.solver, timeout=args.timeout,
                      max_iterations=args.max_iterations, validate_sat=args.validate_sat,
                      validate_unsat=args.validate_unsat)
    off = [f for f in ("rewriting", "constant-folding", "symmetry", "monotonicity",
                       "bounding", "interpolation")
           if getattr(args, "no_" + f.replace("-", "_"))]
    if args.no_lemmas:
        off += ["symmetry", "monotonicity", "bounding", "interpolation"]
    return cfg.without(*off)


def format_model(model: ModelView, declared: list[T.Term], assertions: list[T.Term]) -> list[str]:
    """A ``(model ...)`` block; exp values appear as trailing comments."""
    assignment = dict(model.assignment)
    for v in declared:
        assignment.setdefault(v.name, False if v.sort is T.BOOL else 0)
    if assertions:
        assignment = complete_assignment(T.and_(*assertions) if len(assertions) > 1
                                         else assertions[0], assignment)
    sorts = {v.name: v.sort for v in declared}
    lines = ["(model"]
    for name in sorted(assignment):
        value = assignment[name]
        if isinstance(value, bool) or sorts.get(name) is T.BOOL:
            lines.append(f"  (define-fun {quote_symbol(name)} () Bool {str(bool(value)).lower()})")
        else:
            shown = print_term(T.Int(value))
            lines.append(f"  (define-fun {quote_symbol(name)} () Int {shown})")
    for e, v in sorted(model.exp_values.items(), key=lambda kv: kv[0].uid):
        if len(str(e)) < 200:
            lines.append(f"  ; {e} = {print_term(T.Int(v))}")
    lines.append(")")
    return lines


class ScriptRunner:
    def __init__(self, config: SolveConfig, show_model: bool = False, show_stats: bool = False,
                 out=None):
        self.session = Session(config)
        self.show_model = show_model
        self.show_stats = show_stats
        self.out = out or sys.stdout
        self.declared: list[T.Term] = []
        self.last: SolveResult | None = None

    def emit(self, line: str) -> None:
        print(line, file=self.out, flush=True)

    def run(self, script: S.Script) -> int:
        checked = False
        for cmd in script.commands:
            if isinstance(cmd, S.Exit):
                break
            checked |= isinstance(cmd, S.CheckSat)
            self.execute(cmd)
        if not checked:
            self.execute(S.CheckSat())
        return EXIT_CODES[self.last.verdict] if self.last else 0

    def execute(self, cmd: S.Command) -> None:
        s = self.session
        if isinstance(cmd, S.DeclareConst):
            self.declared.append(cmd.var)
        elif isinstance(cmd, S.Assert):
            s.add_assertion(cmd.term)
        elif isinstance(cmd, S.Push):
            s.push(cmd.levels)
        elif isinstance(cmd, S.Pop):
            s.pop(cmd.levels)
        elif isinstance(cmd, S.CheckSat):
            self.check()
        elif isinstance(cmd, S.GetModel):
            if self.last is None or self.last.verdict != SAT:
                self.emit('(error "model is not available")')
            else:
                for line in format_model(self.last.model, self.declared, s.assertions()):
                    self.emit(line)
        elif isinstance(cmd, S.GetValue):
            self.get_value(cmd.terms)

    def check(self) -> None:
        r = self.session.check()
        self.last = r
        self.emit(r.verdict)
        if r.verdict == UNKNOWN:
            self.emit(f"; reason: {r.reason}")
        if r.validation is not None:
            self.emit(f"; validation: {r.validation.verdict}")
        if self.show_model and r.verdict == SAT:
            for line in format_model(r.model, self.declared, self.session.assertions()):
                self.emit(line)
        if self.show_stats:
            for line in r.stats.render():
                self.emit(f"; {line}")

    def get_value(self, terms: tuple[T.Term, ...]) -> None:
        if self.last is None or self.last.verdict != SAT:
            self.emit('(error "model is not available")')
            return
        sigma = dict(self.last.model.assignment)
        for v in T.free_vars(*terms):
            sigma.setdefault(v.name, False if v.sort is T.BOOL else 0)
        pairs = []
        for t in terms:
            try:
                v = T.eval_eia(t, sigma, self.session.config.exp_cap)
            except ResourceLimit:
                self.emit(f'(error "value of {print_term(t)} exceeds the size cap")')
                return
            shown = str(v).lower() if isinstance(v, bool) else print_term(T.Int(v))
            pairs.append(f"({print_term(t)} {shown})")
        self.emit("(" + " ".join(pairs) + ")")


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.WARNING - 10 * args.verbose,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        config = config_from_args(args)
    except ValueError as exc:
        print(f"eia-solve: {exc}", file=sys.stderr)
        return EXIT_INPUT_ERROR
    try:
        if args.file == "-":
            text = sys.stdin.buffer.read()
        else:
            with open(args.file, "rb") as f:
                text = f.read()
        script = parse(text)
    except OSError as exc:
        print(f"eia-solve: {exc}", file=sys.stderr)
        return EXIT_INPUT_ERROR
    except ParseError as exc:
        print(f'(error "{exc}")', file=sys.stderr)
        return EXIT_INPUT_ERROR
    try:
        runner = ScriptRunner(config, args.model, args.stats)
    except SpawnFailure as exc:
        print(f"eia-solve: {exc}", file=sys.stderr)
        return EXIT_BACKEND_ERROR
    exe = runner.session.spec.argv[0]
    if shutil.which(exe) is None:
        print(f"eia-solve: backend executable {exe!r} not found", file=sys.stderr)
        return EXIT_BACKEND_ERROR
    try:
        return runner.run(script)
    except SpawnFailure as exc:
        print(f"eia-solve: {exc}", file=sys.stderr)
        return EXIT_BACKEND_ERROR
    except EiaError as exc:
        print(f'(error "{exc}")', file=sys.stderr)
        return EXIT_INPUT_ERROR
    finally:
        runner.session.close()


if __name__ == "__main__":
    sys.exit(main())
