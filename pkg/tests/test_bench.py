import csv
import random

import pytest

from eia.bench import (CSV_FIELDS, PRESETS, RunRecord, cdf_report, conflicts, desk_corpus,
                       load_configs, main, read_csv, run_suite, totals, write_csv)
from eia.engine import SAT, UNKNOWN, UNSAT


def rec(file, config, verdict, ms=10):
    return RunRecord(file, config, verdict, ms)


def test_cdf_examples():
    assert cdf_report([rec("a", "c", SAT, 50)]) == [(1, 1)]
    records = [rec("a", "c", SAT, 50), rec("b", "c", UNSAT, 150), rec("d", "c", SAT, 150),
               rec("e", "c", UNKNOWN, 20)]
    assert cdf_report(records) == [(1, 1), (2, 3)]
    assert cdf_report([rec("a", "c", SAT, 0)]) == [(1, 1)]


def test_cdf_is_monotone_on_random_records():
    rng = random.Random(5)
    for _ in range(50):
        records = [rec(str(i), "c", rng.choice([SAT, UNSAT, UNKNOWN]), rng.randint(0, 5000))
                   for i in range(rng.randint(1, 40))]
        report = cdf_report(records)
        buckets = [b for b, _ in report]
        counts = [n for _, n in report]
        assert buckets == sorted(set(buckets))
        assert counts == sorted(counts)
        assert (counts[-1] if counts else 0) == sum(r.solved for r in records)


def test_totals_virtual_best_and_conflicts():
    records = [rec("a", "p", SAT), rec("a", "q", UNKNOWN), rec("b", "p", UNKNOWN),
               rec("b", "q", UNSAT), rec("c", "p", UNKNOWN), rec("c", "q", UNKNOWN)]
    t = totals(records)
    assert t["p"][SAT] == 1 and t["q"][UNSAT] == 1
    assert t["VB"][SAT] + t["VB"][UNSAT] == 2 and t["VB"][UNKNOWN] == 1
    assert conflicts(records) == []
    assert conflicts(records + [rec("a", "r", UNSAT)]) == [("a", {"p": SAT, "q": UNKNOWN, "r": UNSAT})]


def test_csv_round_trip(tmp_path):
    records = [RunRecord("a.smt2", "default", SAT, 12, 3, 4, 1, 2, 0, "confirmed")]
    write_csv(records, tmp_path / "r.csv")
    assert read_csv(tmp_path / "r.csv") == records


def test_empty_directory_gives_header_only(tmp_path):
    out = tmp_path / "r.csv"
    assert run_suite(tmp_path, PRESETS, out=out) == []
    assert out.read_text().strip() == ",".join(CSV_FIELDS)


def test_load_configs(tmp_path):
    assert list(load_configs("all")) == list(PRESETS)
    assert len(PRESETS) == 7
    assert list(load_configs("default, no-symmetry")) == ["default", "no-symmetry"]
    with pytest.raises(ValueError):
        load_configs("fastest")
    path = tmp_path / "c.json"
    path.write_text('[{"name": "slow", "timeout": 60, "bounding": false}]')
    cfg = load_configs(str(path))["slow"]
    assert cfg.timeout == 60 and not cfg.bounding


def test_bundled_corpus_statuses():
    files = sorted(desk_corpus().glob("*.smt2"))
    assert len(files) == 12
    for f in files:
        text = f.read_text()
        assert "(set-info :status" in text


@pytest.mark.backend
def test_desk_corpus_suite(tmp_path):
    out = tmp_path / "r.csv"
    records = run_suite(desk_corpus(), PRESETS, timeout=3, jobs=4, out=out)
    assert len(records) == 84
    with open(out, newline="") as f:
        assert len(list(csv.DictReader(f))) == 84
    assert conflicts(records) == []
    t = totals(records)
    best = t["VB"][SAT] + t["VB"][UNSAT]
    for name in PRESETS:
        assert best >= t[name][SAT] + t[name][UNSAT]
    assert t["no-rewriting-no-lemmas"][SAT] < t["default"][SAT]
    # expected statuses are never contradicted
    status = {f.name: f.read_text().split(":status ")[1].split(")")[0]
              for f in desk_corpus().glob("*.smt2")}
    for r in records:
        if r.solved and status[r.file] in (SAT, UNSAT):
            assert r.verdict == status[r.file], r
        if r.verdict == SAT:
            assert r.validation == "confirmed", r


@pytest.mark.backend
def test_suite_verdicts_are_deterministic():
    configs = load_configs("default,no-interpolation")
    first = run_suite(desk_corpus(), configs, timeout=3, jobs=2)
    second = run_suite(desk_corpus(), configs, timeout=3, jobs=2)
    key = lambda rs: [(r.file, r.config, r.verdict) for r in rs]
    assert key(first) == key(second)


@pytest.mark.backend
def test_cli_entry(tmp_path, capsys):
    out = tmp_path / "r.csv"
    code = main(["--configs", "default", "--timeout", "3", "--jobs", "4", "--out", str(out), "--cdf"])
    assert code == 0
    text = capsys.readouterr().out
    assert "VB" in text and "# default" in text
    assert main(["--configs", "nope"]) == 2
