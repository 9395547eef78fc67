from __future__ import annotations
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import islice
from typing import Any, Callable, Dict, Iterable, Iterator, List, Optional, Sequence, Tuple
import logging
import os
import random

from hypercube import D_MAX, Vertex, check_dimension, layer, parse_set, weight
from matched_pairs import MatchedPair, canonical_phi, directed_volume, enumerate_all_level_pairs
from conjectures import (
    DEFAULT_C_GRID,
    ConjectureRecord,
    TheoremCheck,
    check_thm_cslr,
    check_thm_cspoin,
    check_thm_flowpoin,
    check_thm_sachdeva,
    evaluate_conjecture,
)
from kernel import ConfigError, fraction_from_json, fraction_to_json, signature

log = logging.getLogger(__name__)

CONJECTURES = ("glr", "rout")
GENERATORS = ("exhaustive", "random")
EXHAUSTIVE_MAX_D = {"rout": 3, "glr": 4, "theorems": 3}


# ---------------------------
# Config
# ---------------------------

def env_workers(default: int = 1) -> int:
    raw = os.environ.get("HCF_THREADS")
    if not raw:
        return default
    try:
        return max(1, int(raw))
    except ValueError:
        raise ConfigError(f"HCF_THREADS must be an integer, got {raw!r}")


@dataclass
class SearchConfig:
    conjecture: str
    generator: str = "exhaustive"
    d: int = 3
    budget: Optional[int] = None       # instance count (random) or cap (exhaustive)
    seed: int = 0
    max_size: int = 6                  # |S| cap for level pairs
    workers: Optional[int] = None      # None: HCF_THREADS, else 1
    keep_records: bool = False
    c_grid: Tuple[Fraction, ...] = DEFAULT_C_GRID

    def validate(self) -> "SearchConfig":
        if self.conjecture not in CONJECTURES + ("theorems",):
            raise ConfigError(f"unknown conjecture {self.conjecture!r}; choose from {', '.join(CONJECTURES)}")
        if self.generator not in GENERATORS:
            raise ConfigError(f"unknown generator {self.generator!r}; choose from {', '.join(GENERATORS)}")
        if isinstance(self.d, bool) or not isinstance(self.d, int) or not (2 <= self.d <= D_MAX):
            raise ConfigError(f"d must satisfy 2 <= d <= {D_MAX}, got {self.d!r}")
        if self.generator == "exhaustive" and self.d > EXHAUSTIVE_MAX_D[self.conjecture]:
            raise ConfigError(
                f"exhaustive {self.conjecture} sweeps need d <= {EXHAUSTIVE_MAX_D[self.conjecture]}; use the random generator"
            )
        if self.generator == "random" and not self.budget:
            raise ConfigError("the random generator needs a positive budget")
        if self.budget is not None and self.budget <= 0:
            raise ConfigError(f"budget must be positive, got {self.budget}")
        if self.max_size < 1:
            raise ConfigError(f"max size must be positive, got {self.max_size}")
        if self.workers is not None and self.workers < 1:
            raise ConfigError(f"workers must be positive, got {self.workers}")
        return self

    def pool_size(self) -> int:
        return self.workers if self.workers is not None else env_workers()

    def params(self) -> Dict[str, Any]:
        return {"generator": self.generator, "d": self.d, "budget": self.budget, "max_size": self.max_size}


# ---------------------------
# Generators
# ---------------------------
# Every generator yields instances in a fixed order for a fixed (d, seed).

Subset = Tuple[int, Tuple[Vertex, ...]]


def exhaustive_subsets(d: int) -> Iterator[Subset]:
    """All proper nonempty S ⊆ {0,1}^d, by increasing membership mask."""
    n = 1 << d
    for mask in range(1, (1 << n) - 1):
        yield d, tuple(x for x in range(n) if (mask >> x) & 1)


def random_subsets(d: int, count: int, seed: int) -> Iterator[Subset]:
    """Each subset draws a density first, then each vertex independently."""
    rng = random.Random(seed)
    n = 1 << d
    made = 0
    while made < count:
        p = rng.random()
        S = tuple(x for x in range(n) if rng.random() < p)
        if 0 < len(S) < n:
            made += 1
            yield d, S


def exhaustive_level_pairs(d: int, max_size: int) -> Iterator[MatchedPair]:
    return enumerate_all_level_pairs(d, max_size)


def random_level_pairs(d: int, count: int, seed: int, max_size: int) -> Iterator[MatchedPair]:
    """Random S ⊆ L_i, then a random distinct target above each s in L_j."""
    rng = random.Random(seed)
    made = 0
    while made < count:
        i = rng.randrange(d)
        j = rng.randrange(i + 1, d + 1)
        Li = sorted(layer(d, i))
        k = rng.randint(1, min(max_size, len(Li)))
        phi: List[Tuple[Vertex, Vertex]] = []
        used = set()
        for s in sorted(rng.sample(Li, k)):
            free = [x for x in range(1 << d) if x & s == s and weight(x) == j and x not in used]
            if free:
                t = rng.choice(free)
                used.add(t)
                phi.append((s, t))
        if not phi:
            continue
        S = [s for s, _ in phi]
        T = [t for _, t in phi]
        made += 1
        yield MatchedPair.from_phi(d, canonical_phi(S, T))


def instances_for(cfg: SearchConfig) -> Iterator[Any]:
    if cfg.conjecture == "glr":
        if cfg.generator == "exhaustive":
            it = exhaustive_level_pairs(cfg.d, cfg.max_size)
        else:
            it = random_level_pairs(cfg.d, cfg.budget, cfg.seed, cfg.max_size)
    else:
        if cfg.generator == "exhaustive":
            it = exhaustive_subsets(cfg.d)
        else:
            it = random_subsets(cfg.d, cfg.budget, cfg.seed)
    if cfg.budget is not None:
        it = islice(it, cfg.budget)
    return it


# ---------------------------
# Worker pool
# ---------------------------

def pooled_map(fn: Callable[[Any], Any], items: Iterable[Any], workers: int, chunksize: int = 16) -> Iterator[Any]:
    """Order-preserving map; in-process when workers == 1."""
    if workers <= 1:
        for x in items:
            yield fn(x)
        return
    with ProcessPoolExecutor(max_workers=workers) as ex:
        yield from ex.map(fn, items, chunksize=chunksize)


def _evaluate(job: Tuple[str, Any, Tuple[Fraction, ...]]) -> ConjectureRecord:
    conjecture, instance, c_grid = job
    return evaluate_conjecture(conjecture, instance, c_grid)


# ---------------------------
# Conjecture reports
# ---------------------------

@dataclass
class ConjectureReport:
    conjecture: str
    seed: int
    params: Dict[str, Any]
    instances: int = 0
    vacuous: int = 0
    min_ratio: Optional[Fraction] = None
    witness: Optional[Dict[str, Any]] = None
    failures: List[Dict[str, Any]] = field(default_factory=list)
    theorem_violations: int = 0
    split_attempts: int = 0
    split_successes: int = 0
    records: List[Dict[str, Any]] = field(default_factory=list)

    def fold(self, rec: ConjectureRecord, keep: bool = False) -> None:
        """Add one record; ties keep the earlier witness."""
        self.instances += 1
        if rec.vacuous:
            self.vacuous += 1
        elif self.min_ratio is None or rec.ratio < self.min_ratio:
            self.min_ratio = rec.ratio
            self.witness = rec.instance
        if rec.extras.get("split") is not None:
            self.split_attempts += 1
            self.split_successes += int(bool(rec.extras["split"]))
        if rec.failed:
            self.failures.append(rec.to_json())
            if rec.proven:
                self.theorem_violations += 1
        if keep:
            self.records.append(rec.to_json())

    def to_json(self) -> Dict[str, Any]:
        out: Dict[str, Any] = {
            "kind": "conjecture-report",
            "conjecture": self.conjecture,
            "seed": self.seed,
            "generator": self.params,
            "instances": self.instances,
            "vacuous": self.vacuous,
            "min_ratio": None if self.min_ratio is None else fraction_to_json(self.min_ratio),
            "witness": self.witness,
            "witness_signature": None if self.witness is None else signature(self.witness),
            "failures": self.failures,
            "theorem_violations": self.theorem_violations,
        }
        if self.conjecture == "glr":
            out["split"] = {"attempts": self.split_attempts, "successes": self.split_successes}
        if self.records:
            out["records"] = self.records
        return out

    @staticmethod
    def from_json(obj: Dict[str, Any]) -> "ConjectureReport":
        rep = ConjectureReport(obj["conjecture"], int(obj["seed"]), dict(obj.get("generator") or {}))
        rep.instances = int(obj.get("instances", 0))
        rep.vacuous = int(obj.get("vacuous", 0))
        rep.min_ratio = None if obj.get("min_ratio") is None else fraction_from_json(obj["min_ratio"])
        rep.witness = obj.get("witness")
        rep.failures = list(obj.get("failures", []))
        rep.theorem_violations = int(obj.get("theorem_violations", 0))
        split = obj.get("split") or {}
        rep.split_attempts = int(split.get("attempts", 0))
        rep.split_successes = int(split.get("successes", 0))
        rep.records = list(obj.get("records", []))
        return rep

    def csv_rows(self) -> List[List[Any]]:
        mr = "" if self.min_ratio is None else str(self.min_ratio)
        rows = [["conjecture", "d", "generator", "seed", "instances", "vacuous", "min_ratio", "failures"]]
        rows.append([self.conjecture, self.params.get("d"), self.params.get("generator"), self.seed,
                     self.instances, self.vacuous, mr, len(self.failures)])
        return rows

    def text_lines(self) -> List[str]:
        lines = [
            f"conjecture: {self.conjecture}",
            f"generator: {self.params.get('generator')} d={self.params.get('d')} seed={self.seed}",
            f"instances: {self.instances} ({self.vacuous} vacuous)",
            f"min ratio: {'-' if self.min_ratio is None else self.min_ratio}",
        ]
        if self.witness is not None:
            lines.append(f"witness: {self.witness}")
        if self.conjecture == "glr":
            lines.append(f"split: {self.split_successes}/{self.split_attempts}")
        lines.append(f"failures: {len(self.failures)} (theorem violations: {self.theorem_violations})")
        return lines


def run_search(cfg: SearchConfig) -> ConjectureReport:
    """Stream generated instances through the tester and fold the records in order."""
    cfg.validate()
    if cfg.conjecture not in CONJECTURES:
        raise ConfigError(f"run_search handles {', '.join(CONJECTURES)}; use run_theorem_sweep for theorems")
    report = ConjectureReport(cfg.conjecture, cfg.seed, cfg.params())
    jobs = ((cfg.conjecture, inst, tuple(cfg.c_grid)) for inst in instances_for(cfg))
    for rec in pooled_map(_evaluate, jobs, cfg.pool_size()):
        report.fold(rec, cfg.keep_records)
    log.info(
        "%s %s d=%d: %d instances, min ratio %s",
        cfg.conjecture, cfg.generator, cfg.d, report.instances, report.min_ratio,
    )
    return report


def replay_witness(report: ConjectureReport, c_grid: Sequence[Fraction] = DEFAULT_C_GRID) -> bool:
    """Re-run the tester on the witness; True when it reproduces min_ratio exactly."""
    if report.witness is None:
        return report.min_ratio is None
    w = report.witness
    if report.conjecture == "glr":
        rec = evaluate_conjecture("glr", MatchedPair.from_json(w))
    else:
        d = int(w["d"])
        rec = evaluate_conjecture("rout", (d, tuple(sorted(parse_set(w["S"], d)))), c_grid)
    return rec.ratio == report.min_ratio


@dataclass(frozen=True)
class Trend:
    points: Tuple[Tuple[int, Optional[Fraction]], ...]
    decreasing: bool

    def to_json(self) -> Dict[str, Any]:
        return {
            "points": [[d, None if q is None else fraction_to_json(q)] for d, q in self.points],
            "decreasing": self.decreasing,
            "note": "conjecture-relevant evidence" if self.decreasing else "",
        }


def ratio_trend(reports: Iterable[ConjectureReport]) -> Trend:
    """Flag a minimum ratio that strictly decreases as d grows (needs two or more dimensions)."""
    best: Dict[int, Optional[Fraction]] = {}
    for rep in reports:
        d = int(rep.params["d"])
        q = rep.min_ratio
        if d not in best or (q is not None and (best[d] is None or q < best[d])):
            best[d] = q
    points = tuple(sorted(best.items()))
    ratios = [q for _, q in points]
    decreasing = len(ratios) >= 2 and None not in ratios and all(a > b for a, b in zip(ratios, ratios[1:]))
    return Trend(points, decreasing)


# ---------------------------
# Proven-theorem sweeps
# ---------------------------

@dataclass
class StatementTally:
    checked: int = 0
    passed: int = 0
    vacuous: int = 0
    min_slack: Optional[Fraction] = None
    failures: List[Dict[str, Any]] = field(default_factory=list)

    def add(self, chk: TheoremCheck) -> None:
        self.checked += 1
        if chk.extras.get("vacuous"):
            self.vacuous += 1
        if chk.passed:
            self.passed += 1
        else:
            self.failures.append(chk.to_json())
        if chk.bound > 0:
            slack = Fraction(chk.flow) / chk.bound
            if self.min_slack is None or slack < self.min_slack:
                self.min_slack = slack

    def to_json(self) -> Dict[str, Any]:
        return {
            "checked": self.checked,
            "passed": self.passed,
            "vacuous": self.vacuous,
            "min_flow_over_bound": None if self.min_slack is None else fraction_to_json(self.min_slack),
            "failures": self.failures,
        }


@dataclass
class TheoremSweepReport:
    seed: int
    params: Dict[str, Any]
    instances: int = 0
    tallies: Dict[str, StatementTally] = field(default_factory=dict)

    @property
    def violations(self) -> int:
        return sum(len(t.failures) for t in self.tallies.values())

    def to_json(self) -> Dict[str, Any]:
        return {
            "kind": "theorem-sweep",
            "seed": self.seed,
            "generator": self.params,
            "instances": self.instances,
            "statements": {k: t.to_json() for k, t in self.tallies.items()},
            "violations": self.violations,
        }

    def csv_rows(self) -> List[List[Any]]:
        rows = [["statement", "checked", "passed", "vacuous", "min_flow_over_bound"]]
        for k, t in sorted(self.tallies.items()):
            rows.append([k, t.checked, t.passed, t.vacuous, "" if t.min_slack is None else str(t.min_slack)])
        return rows

    def text_lines(self) -> List[str]:
        lines = [f"theorem sweep: {self.params.get('generator')} d={self.params.get('d')} seed={self.seed}, {self.instances} subsets"]
        for k, t in sorted(self.tallies.items()):
            slack = "-" if t.min_slack is None else str(t.min_slack)
            lines.append(f"  {k}: {t.passed}/{t.checked} passed, min flow/bound {slack}")
        lines.append(f"violations: {self.violations}")
        return lines


def theorem_checks(inst: Subset) -> List[TheoremCheck]:
    """All subset statements for S, plus edge-disjoint routing on its volume certificate."""
    d, S = inst
    out = [check_thm_flowpoin(d, S), check_thm_cspoin(d, S), check_thm_cslr(d, S)]
    _, cert = directed_volume(d, S)
    if cert.pair.phi:
        out.append(check_thm_sachdeva(cert.pair))
    return out


def run_theorem_sweep(
    d: int, generator: str = "exhaustive", budget: Optional[int] = None, seed: int = 0, workers: Optional[int] = None
) -> TheoremSweepReport:
    cfg = SearchConfig("theorems", generator, d, budget, seed, workers=workers).validate()
    check_dimension(d)
    it = exhaustive_subsets(d) if generator == "exhaustive" else random_subsets(d, budget, seed)
    if budget is not None:
        it = islice(it, budget)
    report = TheoremSweepReport(seed, cfg.params())
    for checks in pooled_map(theorem_checks, it, cfg.pool_size()):
        report.instances += 1
        for chk in checks:
            report.tallies.setdefault(chk.statement, StatementTally()).add(chk)
    if report.violations:
        log.error("theorem sweep found %d violations", report.violations)
    return report
