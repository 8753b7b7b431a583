"""``eia-bench``: run a directory of ``.smt2`` problems under several configurations.

Results go to a CSV file (one row per problem and configuration); a summary
with per-configuration totals and the virtual best is printed.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import math
import sys
import time
from collections import Counter, defaultdict
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from importlib import resources
from pathlib import Path

from .cli import ScriptRunner
from .engine import SAT, UNKNOWN, UNSAT, SolveConfig
from .errors import EiaError
from .lemmas import Kind
from .smtlib import parse

log = logging.getLogger(__name__)

ERROR = "error"
CSV_FIELDS = ["file", "config", "verdict", "time_ms", "iterations", "sym", "mon", "bnd", "ip",
              "validation"]

PRESETS: dict[str, SolveConfig] = {
    "default": SolveConfig(),
    "no-rewriting": SolveConfig().without("rewriting"),
    "no-symmetry": SolveConfig().without("symmetry"),
    "no-monotonicity": SolveConfig().without("monotonicity"),
    "no-bounding": SolveConfig().without("bounding"),
    "no-interpolation": SolveConfig().without("interpolation"),
    "no-rewriting-no-lemmas": SolveConfig().without("rewriting").without_lemmas(),
}


@dataclass
class RunRecord:
    file: str
    config: str
    verdict: str
    time_ms: int
    iterations: int = 0
    sym: int = 0
    mon: int = 0
    bnd: int = 0
    ip: int = 0
    validation: str = ""

    @property
    def solved(self) -> bool:
        return self.verdict in (SAT, UNSAT)

    def row(self) -> dict:
        return {k: getattr(self, k) for k in CSV_FIELDS}


def desk_corpus() -> Path:
    """Directory of the bundled example problems."""
    return Path(str(resources.files("eia") / "corpus"))


def load_configs(spec: str) -> dict[str, SolveConfig]:
    """Presets by name (comma separated, or ``all``) or a JSON file.

    The JSON file holds a list of objects with a ``name`` and any
    :class:`SolveConfig` fields, e.g. ``{"name": "slow", "timeout": 60}``.
    """
    path = Path(spec)
    if path.suffix == ".json" and path.exists():
        out = {}
        for entry in json.loads(path.read_text()):
            entry = dict(entry)
            name = entry.pop("name")
            out[name] = SolveConfig(**entry)
        return out
    names = list(PRESETS) if spec == "all" else [n.strip() for n in spec.split(",") if n.strip()]
    unknown = [n for n in names if n not in PRESETS]
    if unknown:
        raise ValueError(f"unknown preset(s) {', '.join(unknown)}; choose from {', '.join(PRESETS)}")
    return {n: PRESETS[n] for n in names}


def run_one(path: Path, name: str, config: SolveConfig) -> RunRecord:
    start = time.monotonic()
    try:
        script = parse(path.read_bytes())
        runner = ScriptRunner(config, out=io.StringIO())
        try:
            runner.run(script)
        finally:
            runner.session.close()
        result = runner.last
    except (EiaError, OSError) as exc:
        log.warning("%s [%s]: %s", path.name, name, exc)
        return RunRecord(path.name, name, ERROR, int((time.monotonic() - start) * 1000))
    elapsed = int((time.monotonic() - start) * 1000)
    lemmas = result.stats.lemmas
    return RunRecord(
        path.name, name, result.verdict, elapsed, result.stats.iterations,
        lemmas.get(Kind.SYMMETRY, 0), lemmas.get(Kind.MONOTONICITY, 0),
        lemmas.get(Kind.BOUNDING, 0), lemmas.get(Kind.INTERPOLATION, 0),
        result.validation.verdict if result.validation is not None else "")


def run_suite(directory: str | Path, configs: dict[str, SolveConfig], timeout: float | None = None,
              jobs: int = 1, out: str | Path | None = None,
              validate_sat: bool = True, validate_unsat: int | None = None) -> list[RunRecord]:
    """Run every ``.smt2`` file of ``directory`` under every configuration."""
    files = sorted(Path(directory).glob("*.smt2"))
    tasks = []
    for f in files:
        for name, cfg in configs.items():
            cfg = replace(cfg, validate_sat=validate_sat, validate_unsat=validate_unsat)
            if timeout is not None:
                cfg = replace(cfg, timeout=timeout)
            tasks.append((f, name, cfg))
    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            records = list(pool.map(lambda t: run_one(*t), tasks))
    else:
        records = [run_one(*t) for t in tasks]
    if out is not None:
        write_csv(records, out)
    return records


def write_csv(records: list[RunRecord], out) -> None:
    if isinstance(out, (str, Path)):
        with open(out, "w", newline="") as f:
            write_csv(records, f)
        return
    writer = csv.DictWriter(out, fieldnames=CSV_FIELDS)
    writer.writeheader()
    for r in records:
        writer.writerow(r.row())


def read_csv(path: str | Path) -> list[RunRecord]:
    with open(path, newline="") as f:
        rows = list(csv.DictReader(f))
    ints = ("time_ms", "iterations", "sym", "mon", "bnd", "ip")
    return [RunRecord(**{k: int(v) if k in ints else v for k, v in row.items()}) for row in rows]


def totals(records: list[RunRecord]) -> dict[str, Counter]:
    """Verdict counts per configuration plus a ``VB`` (virtual best) entry."""
    out: dict[str, Counter] = defaultdict(Counter)
    best: dict[str, str] = {}
    for r in records:
        out[r.config][r.verdict] += 1
        if r.solved:
            best[r.file] = r.verdict
        else:
            best.setdefault(r.file, UNKNOWN)
    out["VB"] = Counter(best.values())
    return dict(out)


def conflicts(records: list[RunRecord]) -> list[tuple[str, dict[str, str]]]:
    """Files on which one configuration says sat and another unsat."""
    by_file: dict[str, dict[str, str]] = defaultdict(dict)
    for r in records:
        by_file[r.file][r.config] = r.verdict
    return [(f, v) for f, v in sorted(by_file.items())
            if SAT in v.values() and UNSAT in v.values()]


def summary(records: list[RunRecord]) -> str:
    lines = [f"{'config':<24} {'sat':>5} {'unsat':>6} {'unknown':>8} {'error':>6} {'solved':>7}"]
    for name, c in totals(records).items():
        lines.append(f"{name:<24} {c[SAT]:>5} {c[UNSAT]:>6} {c[UNKNOWN]:>8} {c[ERROR]:>6} "
                     f"{c[SAT] + c[UNSAT]:>7}")
    return "\n".join(lines)


def cdf_report(records: list[RunRecord]) -> list[tuple[int, int]]:
    """Cumulative solved count per 100 ms bucket (bucket ``b`` covers up to ``100*b`` ms)."""
    counts = Counter(max(1, math.ceil(r.time_ms / 100)) for r in records if r.solved)
    out, total = [], 0
    for b in sorted(counts):
        total += counts[b]
        out.append((b, total))
    return out


def format_cdf(records: list[RunRecord]) -> str:
    by_config: dict[str, list[RunRecord]] = defaultdict(list)
    for r in records:
        by_config[r.config].append(r)
    lines = []
    for name, recs in by_config.items():
        lines.append(f"# {name}: runtime in 1/10 s, solved instances")
        lines += [f"{b} {n}" for b, n in cdf_report(recs)]
    return "\n".join(lines)


def main(argv: list[str] | None = None) -> int:
    p = argparse.ArgumentParser(prog="eia-bench", description=__doc__.splitlines()[0])
    p.add_argument("--dir", default=None, help="directory of .smt2 files (default: bundled corpus)")
    p.add_argument("--configs", default="all", help="preset names, 'all', or a JSON file")
    p.add_argument("--timeout", type=float, default=10.0, help="seconds per problem")
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--out", default="results.csv")
    p.add_argument("--validate-unsat", type=int, metavar="K")
    p.add_argument("--cdf", action="store_true", help="also print runtime distributions")
    args = p.parse_args(argv)
    logging.basicConfig(level=logging.WARNING)
    try:
        configs = load_configs(args.configs)
    except (ValueError, TypeError, KeyError, json.JSONDecodeError) as exc:
        print(f"eia-bench: {exc}", file=sys.stderr)
        return 2
    directory = Path(args.dir) if args.dir else desk_corpus()
    if not directory.is_dir():
        print(f"eia-bench: {directory} is not a directory", file=sys.stderr)
        return 2
    records = run_suite(directory, configs, args.timeout, args.jobs, args.out,
                        validate_unsat=args.validate_unsat)
    print(summary(records))
    if args.cdf and any(r.solved for r in records):
        print(format_cdf(records))
    bad = conflicts(records)
    for f, verdicts in bad:
        print(f"conflict on {f}: {verdicts}", file=sys.stderr)
    return 1 if bad else 0


if __name__ == "__main__":
    sys.exit(main())
