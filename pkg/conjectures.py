"""
Flow statements about the directed hypercube, checked on concrete instances.

check_thm_* verify proven bounds and report pass/fail; test_conj_* measure
the open routing conjectures and never assert them.
"""
from __future__ import annotations
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Dict, FrozenSet, Iterable, Optional, Sequence, Tuple
import logging
import math

from hypercube import Vertex, check_dimension, check_vertex, down_edges, format_set, weight
from matched_pairs import MatchedPair, directed_volume, require_valid, separation_distance_of_set
from flow_core import CutCertificate, FlowProblem, make_cut, max_flow_value, partition_by_cut, solve
from lr_routing import check_collections, level_span, split_flow_collections
from monotonicity import BooleanFunction, EdgeColoring, charge_loads, distance_to_monotonicity, violated_edges
from kernel import INF, InvalidCut, PreconditionError, SplitFailure, fraction_to_json

log = logging.getLogger(__name__)

FLOW_POINCARE = "flow-poincare"
CS_POINCARE = "cs-poincare"
CS_LR = "cs-lr"
EDGE_DISJOINT_ROUTING = "edge-disjoint-routing"

CS_LR_CONSTANT = 32
GLR_SPLIT_MAX_R = 3
GLR_SPLIT_MAX_COVER = 200
DEFAULT_C_GRID: Tuple[Fraction, ...] = (Fraction(1, 8), Fraction(1, 4), Fraction(1, 2), Fraction(1))


def _subset(d: int, S: Iterable[Vertex]) -> FrozenSet[Vertex]:
    check_dimension(d)
    S = frozenset(check_vertex(d, s) for s in S)
    if not S or len(S) == 1 << d:
        raise PreconditionError("S must be a proper nonempty subset of the cube")
    return S


def subset_instance(d: int, S: Iterable[Vertex]) -> Dict[str, Any]:
    return {"d": d, "S": format_set(d, S)}


# ---------------------------
# Proven bounds
# ---------------------------

@dataclass(frozen=True)
class TheoremCheck:
    statement: str
    flow: int
    bound: Fraction
    passed: bool
    instance: Dict[str, Any]
    extras: Dict[str, Any] = field(default_factory=dict)

    def to_json(self) -> Dict[str, Any]:
        return {
            "statement": self.statement,
            "flow": self.flow,
            "bound": fraction_to_json(self.bound),
            "passed": self.passed,
            "instance": self.instance,
            "extras": self.extras,
        }


def _checked(statement: str, flow: int, bound: Fraction, instance: Dict[str, Any], **extras: Any) -> TheoremCheck:
    passed = flow >= bound
    if not passed:
        log.error("THEOREM VIOLATION [%s]: flow %d < %s on %s", statement, flow, bound, instance)
    return TheoremCheck(statement, flow, Fraction(bound), passed, instance, extras)


def _edge_flow(d: int, S: FrozenSet[Vertex]) -> int:
    return max_flow_value(FlowProblem.on_cube(d, S, vcap=INF, ecap=1))


def check_thm_flowpoin(d: int, S: Iterable[Vertex]) -> TheoremCheck:
    """Unit edge capacities: the flow out of S reaches dirvol(S)."""
    S = _subset(d, S)
    vol, _ = directed_volume(d, S)
    return _checked(FLOW_POINCARE, _edge_flow(d, S), Fraction(vol), subset_instance(d, S), dirvol=vol)


def check_thm_cspoin(d: int, S: Iterable[Vertex]) -> TheoremCheck:
    """Unit edge capacities: the flow reaches r · dirvol(S), r the separation distance."""
    S = _subset(d, S)
    vol, _ = directed_volume(d, S)
    instance = subset_instance(d, S)
    if vol == 0:
        return TheoremCheck(CS_POINCARE, 0, Fraction(0), True, instance, {"vacuous": True})
    r, _ = separation_distance_of_set(d, S)
    return _checked(CS_POINCARE, _edge_flow(d, S), r * vol, instance, dirvol=vol, r=fraction_to_json(r))


def check_thm_cslr(d: int, S: Iterable[Vertex]) -> TheoremCheck:
    """Unit vertex capacities: the flow reaches dirvol(S) / (32 r)."""
    S = _subset(d, S)
    vol, _ = directed_volume(d, S)
    instance = subset_instance(d, S)
    if vol == 0:
        return TheoremCheck(CS_LR, 0, Fraction(0), True, instance, {"vacuous": True})
    r, _ = separation_distance_of_set(d, S)
    flow = max_flow_value(FlowProblem.on_cube(d, S, vcap=1, ecap=1))
    empirical = Fraction(flow) * r / vol
    return _checked(
        CS_LR, flow, Fraction(vol) / (CS_LR_CONSTANT * r), instance,
        dirvol=vol, r=fraction_to_json(r), empirical=fraction_to_json(empirical),
    )


def check_thm_sachdeva(p: MatchedPair) -> TheoremCheck:
    """Disjoint matched S, T: |S| edge-disjoint monotone S→T paths."""
    require_valid(p)
    if p.S & p.T:
        raise PreconditionError("S and T must be disjoint")
    flow = max_flow_value(FlowProblem.on_cube(p.d, p.S, p.T, vcap=INF, ecap=1))
    return _checked(EDGE_DISJOINT_ROUTING, flow, Fraction(len(p.S)), p.to_json())


# ---------------------------
# Cut constructions
# ---------------------------

@dataclass(frozen=True)
class CutFunction:
    function: BooleanFunction
    cut: CutCertificate
    distance_count: int
    passed: bool
    violations_are_cut: bool


def sachdeva_cut_function(p: MatchedPair) -> CutFunction:
    """
    The Boolean function read off a unit-edge min cut between S and T: 1 on
    the source side, 0 on the sink side, and every other x takes the max over
    its strict predecessors (0 when it has none).
    """
    require_valid(p)
    if p.S & p.T:
        raise PreconditionError("S and T must be disjoint")
    d = p.d
    problem = FlowProblem.on_cube(d, p.S, p.T, vcap=INF, ecap=1)
    _, cut = solve(problem)
    part = partition_by_cut(problem, cut)

    table = [0] * (1 << d)
    above_one = [False] * (1 << d)
    for x in sorted(range(1 << d), key=lambda v: (weight(v), v)):
        below = any(table[e.lo] or above_one[e.lo] for e in down_edges(d, x))
        above_one[x] = below
        if x in part.s_side:
            table[x] = 1
        elif x in part.t_side:
            table[x] = 0
        else:
            table[x] = 1 if below else 0
    f = BooleanFunction(d, tuple(table))
    count = int(distance_to_monotonicity(f) * f.size)
    return CutFunction(f, cut, count, count >= len(p.S), violated_edges(f) == cut.F)


@dataclass(frozen=True)
class ColoringCut:
    cut: CutCertificate
    valid: bool
    r: int
    edge_part: int
    vertex_part: int
    sqrt_sum: float
    within_bound: bool
    witness: Tuple[Vertex, ...] = ()

    def to_json(self) -> Dict[str, Any]:
        return {
            "cut": self.cut.to_json(),
            "valid": self.valid,
            "r": self.r,
            "edge_part": self.edge_part,
            "vertex_part": self.vertex_part,
            "sqrt_sum": f"{self.sqrt_sum:.12g}",
            "within_bound": self.within_bound,
        }


def coloring_to_cut(f: BooleanFunction, chi: EdgeColoring, r: int) -> ColoringCut:
    """
    Turn a coloring into a cut of the network from the 1-set to the 0-set with
    unit edges and vertex capacity r²: cut x itself when d(x) > r², otherwise
    cut the violated edges charged to x.
    """
    if r < 1:
        raise PreconditionError(f"r must be at least 1, got {r}")
    load = charge_loads(f, chi)
    cap = r * r
    C = frozenset(x for x, n in load.items() if n > cap)
    F = frozenset(e for e, c in chi.color.items() if (e.lo if c == 1 else e.hi) not in C)
    ones = f.ones()
    problem = FlowProblem.on_cube(f.d, ones, f.zeros(), vcap=cap, ecap=1)
    cut = make_cut(problem, C, F)
    valid, witness = True, ()
    if ones and len(ones) < f.size:
        try:
            partition_by_cut(problem, cut)
        except InvalidCut as exc:
            valid, witness = False, tuple(exc.witness)
            log.error("constructed cut is invalid for %s: %s", f.to_json(), exc)
    edge_part = sum(n for n in load.values() if n <= cap)
    vertex_part = cap * len(C)
    sqrt_sum = math.fsum(math.sqrt(n) for n in load.values())
    within = edge_part + vertex_part <= r * sqrt_sum + 1e-9
    return ColoringCut(cut, valid, r, edge_part, vertex_part, sqrt_sum, within, witness)


# ---------------------------
# Conjecture testers
# ---------------------------

@dataclass(frozen=True)
class ConjectureRecord:
    conjecture: str
    instance: Dict[str, Any]
    ratio: Optional[Fraction]
    failed: bool = False
    proven: bool = False
    extras: Dict[str, Any] = field(default_factory=dict)

    @property
    def vacuous(self) -> bool:
        return self.ratio is None

    def to_json(self) -> Dict[str, Any]:
        return {
            "conjecture": self.conjecture,
            "instance": self.instance,
            "ratio": None if self.ratio is None else fraction_to_json(self.ratio),
            "failed": self.failed,
            "extras": self.extras,
        }


def test_conj_glr(p: MatchedPair, attempt_split: bool = True) -> ConjectureRecord:
    """
    r = j − i collections of vertex-disjoint paths with edge-disjoint union.
    Necessary condition: flow r|S| with vcap=r, ecap=1 on the cover graph.
    Small instances also get the full split into r collections.
    """
    require_valid(p)
    if not p.phi:
        raise PreconditionError("empty matched pair")
    i, j = level_span(p)
    r = j - i
    problem = FlowProblem.on_cover(p.d, p.S, p.T, vcap=r, ecap=1)
    sol, _ = solve(problem)
    need = r * len(p.S)
    necessary = sol.value >= need
    extras: Dict[str, Any] = {"r": r, "flow": sol.value, "necessary": necessary, "split": None}

    small = r <= GLR_SPLIT_MAX_R and len(problem.graph) <= GLR_SPLIT_MAX_COVER
    if attempt_split and necessary and small:
        try:
            parts = split_flow_collections(problem, sol, r)
            why = check_collections(p, [c.paths for c in parts])
            extras["split"] = why is None
            if why:
                extras["split_problem"] = why
        except SplitFailure as exc:
            extras["split"] = False
            extras["split_problem"] = str(exc)
    failed = not necessary or extras["split"] is False
    if failed:
        log.warning("glr instance failed (r=%d, flow %d/%d): %s", r, sol.value, need, p.to_json())
    return ConjectureRecord("glr", p.to_json(), Fraction(sol.value, need), failed, r <= 2, extras)


test_conj_glr.__test__ = False


def test_conj_rout(
    d: int,
    S: Iterable[Vertex],
    c_grid: Sequence[Fraction] = DEFAULT_C_GRID,
    sinks: Optional[Iterable[Vertex]] = None,
) -> ConjectureRecord:
    """
    Flow with unit edges and vertex capacity r² against r · dirvol(S). Fractional
    r runs both ⌈r²⌉ and ⌊r⌋²; the ratio reported is the ⌈r²⌉ one.
    """
    S = _subset(d, S)
    T = None if sinks is None else frozenset(check_vertex(d, t) for t in sinks)
    instance = subset_instance(d, S)
    if T is not None:
        instance["T"] = format_set(d, T)
    vol, _ = directed_volume(d, S, targets=T)
    if vol == 0:
        return ConjectureRecord("rout", instance, None, extras={"dirvol": 0})
    r, _ = separation_distance_of_set(d, S, targets=T)

    def flow_at(cap: int) -> int:
        return max_flow_value(FlowProblem.on_cube(d, S, T, vcap=cap, ecap=1))

    cap = math.ceil(r * r)
    flow = flow_at(cap)
    ratio = Fraction(flow) / (r * vol)
    extras: Dict[str, Any] = {
        "dirvol": vol,
        "r": fraction_to_json(r),
        "vcap": cap,
        "flow": flow,
        "holds": {str(c): ratio >= c for c in c_grid},
    }
    if r.denominator != 1:
        low_cap = math.floor(r) ** 2
        low_flow = flow_at(low_cap)
        extras["floor"] = {
            "vcap": low_cap,
            "flow": low_flow,
            "ratio": fraction_to_json(Fraction(low_flow) / (r * vol)),
        }
    return ConjectureRecord("rout", instance, ratio, extras=extras)


test_conj_rout.__test__ = False


def evaluate_conjecture(conjecture: str, instance: Any, c_grid: Sequence[Fraction] = DEFAULT_C_GRID) -> ConjectureRecord:
    """Run one tester on a generated instance: a MatchedPair for glr, (d, S) for rout."""
    if conjecture == "glr":
        return test_conj_glr(instance)
    if conjecture == "rout":
        d, S = instance
        return test_conj_rout(d, S, c_grid)
    raise PreconditionError(f"unknown conjecture {conjecture!r}")
