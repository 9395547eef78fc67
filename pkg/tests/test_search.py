import json
from fractions import Fraction

import pytest

from domains.glr.recipes import golden_pairs_glr
from domains.rout.recipes import golden_subsets_rout
from kernel import ConfigError, dumps_canonical
from registry import append_telemetry_jsonl, load_report, render_report, write_report
from search import (
    ConjectureReport,
    SearchConfig,
    env_workers,
    exhaustive_subsets,
    instances_for,
    random_level_pairs,
    random_subsets,
    ratio_trend,
    replay_witness,
    run_search,
    run_theorem_sweep,
)
from conjectures import evaluate_conjecture, test_conj_glr as glr_record
from matched_pairs import validate_matched_pair


@pytest.mark.parametrize(
    "kwargs",
    [
        {"conjecture": "rout", "d": 30},
        {"conjecture": "rout", "d": 4},
        {"conjecture": "glr", "d": 5},
        {"conjecture": "rout", "d": 5, "generator": "random"},
        {"conjecture": "rout", "d": 3, "budget": 0},
        {"conjecture": "nope", "d": 3},
        {"conjecture": "glr", "d": 3, "max_size": 0},
    ],
)
def test_bad_configs(kwargs):
    with pytest.raises(ConfigError):
        SearchConfig(**kwargs).validate()


def test_env_workers(monkeypatch):
    monkeypatch.delenv("HCF_THREADS", raising=False)
    assert env_workers() == 1
    monkeypatch.setenv("HCF_THREADS", "3")
    assert env_workers() == 3
    monkeypatch.setenv("HCF_THREADS", "many")
    with pytest.raises(ConfigError):
        env_workers()


def test_generators_are_deterministic():
    assert list(random_subsets(5, 10, 4)) == list(random_subsets(5, 10, 4))
    a = list(random_level_pairs(5, 10, 4, 3))
    assert a == list(random_level_pairs(5, 10, 4, 3))
    assert all(validate_matched_pair(p)[0] for p in a)
    assert sum(1 for _ in exhaustive_subsets(2)) == 14


def test_budget_caps_exhaustive_generation():
    cfg = SearchConfig("rout", d=3, budget=5).validate()
    assert len(list(instances_for(cfg))) == 5


def test_rout_exhaustive_in_the_square():
    report = run_search(SearchConfig("rout", d=2))
    assert report.instances == 14
    assert report.vacuous > 0
    assert report.min_ratio is not None and report.min_ratio > 0
    assert replay_witness(report)


def test_rout_exhaustive_in_the_3_cube():
    report = run_search(SearchConfig("rout", d=3))
    assert report.instances == 254
    assert report.min_ratio > 0
    assert not report.failures
    assert replay_witness(report)


def test_glr_exhaustive_in_the_3_cube():
    report = run_search(SearchConfig("glr", d=3))
    assert report.instances > 0
    assert report.failures == []
    assert report.theorem_violations == 0
    assert report.split_successes == report.split_attempts > 0
    assert report.min_ratio == 1
    assert replay_witness(report)


@pytest.mark.slow
def test_glr_exhaustive_in_the_4_cube():
    report = run_search(SearchConfig("glr", d=4, max_size=4))
    assert report.theorem_violations == 0
    assert report.failures == []


def test_random_search_is_reproducible():
    cfg = dict(conjecture="rout", generator="random", d=5, budget=12, seed=1)
    a = run_search(SearchConfig(**cfg))
    b = run_search(SearchConfig(**cfg))
    assert dumps_canonical(a) == dumps_canonical(b)
    assert a.instances == 12


def test_worker_pool_keeps_the_report_identical():
    one = run_search(SearchConfig("rout", d=2, workers=1, keep_records=True))
    two = run_search(SearchConfig("rout", d=2, workers=2, keep_records=True))
    assert dumps_canonical(one) == dumps_canonical(two)


def test_report_json_roundtrip():
    report = run_search(SearchConfig("rout", d=2))
    again = ConjectureReport.from_json(json.loads(dumps_canonical(report)))
    assert dumps_canonical(again) == dumps_canonical(report)


def test_golden_instances():
    for d, S in golden_subsets_rout():
        rec = evaluate_conjecture("rout", (d, S))
        assert rec.ratio is not None and rec.ratio > 0
    for p in golden_pairs_glr():
        assert not glr_record(p).failed


def _fake_report(d, ratio):
    rep = ConjectureReport("rout", 0, {"d": d, "generator": "exhaustive"})
    rep.min_ratio = ratio
    return rep


def test_ratio_trend():
    falling = ratio_trend([_fake_report(2, Fraction(1)), _fake_report(3, Fraction(1, 2))])
    assert falling.decreasing
    assert falling.to_json()["note"] == "conjecture-relevant evidence"
    flat = ratio_trend([_fake_report(2, Fraction(1)), _fake_report(3, Fraction(1))])
    assert not flat.decreasing
    assert not ratio_trend([_fake_report(2, Fraction(1))]).decreasing


def test_theorem_sweep_of_the_3_cube():
    report = run_theorem_sweep(3)
    assert report.instances == 254
    assert report.violations == 0
    assert set(report.tallies) == {"flow-poincare", "cs-poincare", "cs-lr", "edge-disjoint-routing"}
    assert report.tallies["cs-poincare"].vacuous > 0


def test_random_theorem_sweep():
    report = run_theorem_sweep(5, "random", budget=6, seed=2)
    assert report.instances == 6
    assert report.violations == 0


@pytest.mark.slow
@pytest.mark.parametrize("d", [5, 6, 8])
def test_random_theorem_sweep_at_scale(d):
    report = run_theorem_sweep(d, "random", budget=10_000, seed=0)
    assert report.instances == 10_000
    assert report.violations == 0
    assert report.tallies["cs-lr"].checked == 10_000


@pytest.mark.slow
@pytest.mark.parametrize("d", [6, 8])
def test_random_rout_search_at_scale(d):
    report = run_search(SearchConfig("rout", generator="random", d=d, budget=10_000, seed=0))
    assert report.instances == 10_000
    assert not report.failures
    assert report.min_ratio is not None and report.min_ratio > 0
    assert replay_witness(report)


# ---------------------------
# Rendering and telemetry
# ---------------------------

def test_render_formats():
    report = run_search(SearchConfig("rout", d=2))
    assert json.loads(render_report(report, "json"))["kind"] == "conjecture-report"
    assert render_report(report, "csv").splitlines()[0].startswith("conjecture,d,generator")
    assert "conjecture: rout" in render_report(report, "text")
    with pytest.raises(ConfigError):
        render_report(report, "yaml")


def test_render_plain_documents():
    doc = {"value": 2, "ratio": {"num": 1, "den": 2}}
    assert "ratio: 1/2" in render_report(doc, "text")
    assert render_report(doc, "csv").splitlines()[0] == "key,value"


def test_write_and_load(tmp_path):
    report = run_search(SearchConfig("rout", d=2))
    path = write_report(report, str(tmp_path / "out" / "r.json"))
    assert load_report(path)["instances"] == 14
    with pytest.raises(ConfigError):
        load_report(str(tmp_path / "missing.json"))


def test_telemetry_lines_are_stamped(tmp_path):
    path = append_telemetry_jsonl(str(tmp_path), "rout", [{"a": 1}, {"a": 2}])
    append_telemetry_jsonl(str(tmp_path), "rout", [{"a": 3}])
    with open(path, encoding="utf-8") as f:
        rows = [json.loads(line) for line in f]
    assert [r["a"] for r in rows] == [1, 2, 3]
    assert all(r["ts"].endswith("Z") and r["conjecture"] == "rout" for r in rows)
