from __future__ import annotations
from dataclasses import dataclass, field
from typing import Any, Dict, FrozenSet, Iterable, List, Mapping, Optional, Sequence, Set, Tuple
import logging

from hypercube import (
    CoverGraph,
    Edge,
    Vertex,
    check_coordinate,
    coord,
    cover_graph,
    format_set,
    format_vertex,
    is_level_set,
    is_monotone_path,
    path_edges,
    project,
    weight,
)
from matched_pairs import MatchedPair, require_valid
from flow_core import (
    SNK,
    SRC,
    BoundedArc,
    CutCertificate,
    CutPartition,
    FlowProblem,
    FlowSolution,
    bounded_flow,
    decompose_paths,
    partition_by_cut,
    solve,
)
from kernel import INF, PreconditionError, SplitFailure, TheoremViolation, is_inf

log = logging.getLogger(__name__)

LR_ROUTING = "lr-routing"
DOUBLE_LR_ROUTING = "double-lr-routing"


# ---------------------------
# Solutions
# ---------------------------

@dataclass(frozen=True)
class LRSolution:
    d: int
    paths: Tuple[Tuple[Vertex, ...], ...]

    def __len__(self) -> int:
        return len(self.paths)

    def rendered(self) -> List[List[str]]:
        return [[format_vertex(self.d, v) for v in p] for p in self.paths]

    def to_json(self) -> Dict[str, Any]:
        return {"paths": self.rendered()}


@dataclass(frozen=True)
class DoubleLRSolution:
    first: LRSolution
    second: LRSolution

    def to_json(self) -> Dict[str, Any]:
        return {"first": self.first.rendered(), "second": self.second.rendered()}


def check_lr_solution(p: MatchedPair, sol: LRSolution) -> Optional[str]:
    """First broken LR invariant, or None."""
    d = p.d
    if len(sol.paths) != len(p.S):
        return f"{len(sol.paths)} paths for |S| = {len(p.S)}"
    used: Set[Vertex] = set()
    for path in sol.paths:
        shown = [format_vertex(d, v) for v in path]
        if not path or path[0] not in p.S or path[-1] not in p.T:
            return f"path {shown} does not run from S to T"
        if not is_monotone_path(d, path):
            return f"path {shown} is not monotone"
        clash = used.intersection(path)
        if clash:
            return f"path {shown} shares vertex {format_vertex(d, min(clash))}"
        used.update(path)
    return None


def check_collections(p: MatchedPair, collections: Sequence[Sequence[Tuple[Vertex, ...]]]) -> Optional[str]:
    """Each collection an LR solution, all of them together edge-disjoint."""
    for n, paths in enumerate(collections, 1):
        why = check_lr_solution(p, LRSolution(p.d, tuple(paths)))
        if why:
            return f"collection {n}: {why}"
    seen: Set[Edge] = set()
    for paths in collections:
        for path in paths:
            for e in path_edges(path):
                if e in seen:
                    return f"edge {e.fmt(p.d)} used twice"
                seen.add(e)
    return None


def check_double_lr_solution(p: MatchedPair, sol: DoubleLRSolution) -> Optional[str]:
    return check_collections(p, [sol.first.paths, sol.second.paths])


# ---------------------------
# Routing
# ---------------------------

def level_span(p: MatchedPair) -> Tuple[int, int]:
    i = is_level_set(p.S)
    j = is_level_set(p.T)
    if i is None or j is None:
        raise PreconditionError("levels required: S and T must each lie in one layer (antichains are not supported)")
    return i, j


def _routed(p: MatchedPair, vcap: int, statement: str) -> Tuple[FlowProblem, FlowSolution]:
    problem = FlowProblem.on_cover(p.d, p.S, p.T, vcap=vcap, ecap=INF if vcap == 1 else 1)
    sol, _ = solve(problem)
    need = vcap * len(p.S)
    if sol.value < need:
        log.error("flow %d below %d on %s", sol.value, need, p.to_json())
        raise TheoremViolation(statement, p.to_json(), f"max flow {sol.value} < {need}")
    return problem, sol


def lr_solution(p: MatchedPair) -> LRSolution:
    """|S| vertex-disjoint monotone S→T paths (unit vertex capacities on the cover graph)."""
    require_valid(p)
    if not p.phi:
        return LRSolution(p.d, ())
    level_span(p)
    _, sol = _routed(p, 1, LR_ROUTING)
    return LRSolution(p.d, sol.paths)


def double_lr_solution(p: MatchedPair) -> DoubleLRSolution:
    """
    Two LR solutions whose union is edge-disjoint: route 2|S| units with
    vcap=2, ecap=1 and split the flow into two unit-throughput halves.
    """
    require_valid(p)
    if not p.phi:
        empty = LRSolution(p.d, ())
        return DoubleLRSolution(empty, empty)
    i, j = level_span(p)
    if j - i < 2:
        raise PreconditionError(f"distance ≥ 2 required, got layers {i} and {j}")
    problem, sol = _routed(p, 2, DOUBLE_LR_ROUTING)
    first, second = split_flow_two_collections(problem, sol)
    return DoubleLRSolution(LRSolution(p.d, first.paths), LRSolution(p.d, second.paths))


# ---------------------------
# Splitting a flow into collections
# ---------------------------

@dataclass
class _Remainder:
    """The part of a 0/1 flow not yet assigned to a collection."""
    edges: Set[Edge]
    emit: Dict[Vertex, int]
    absorb: Dict[Vertex, int]
    through: Dict[Vertex, int]

    @staticmethod
    def of(flow: FlowSolution) -> "_Remainder":
        emit: Dict[Vertex, int] = {}
        absorb: Dict[Vertex, int] = {}
        for path in flow.paths:
            emit[path[0]] = emit.get(path[0], 0) + 1
            absorb[path[-1]] = absorb.get(path[-1], 0) + 1
        return _Remainder(set(flow.edge_load()), emit, absorb, flow.vertex_load())

    def minus(self, g: "_Remainder") -> "_Remainder":
        def sub(a: Mapping[Vertex, int], b: Mapping[Vertex, int]) -> Dict[Vertex, int]:
            out = {v: n - b.get(v, 0) for v, n in a.items()}
            return {v: n for v, n in out.items() if n > 0}
        return _Remainder(self.edges - g.edges, sub(self.emit, g.emit), sub(self.absorb, g.absorb), sub(self.through, g.through))

    def as_solution(self, d: int) -> FlowSolution:
        paths = decompose_paths({e: 1 for e in self.edges}, self.emit, self.absorb)
        return FlowSolution(len(paths), {e: 1 for e in self.edges}, tuple(paths), d)


def _window(t: int, k: int) -> Tuple[int, int]:
    """Share of a throughput-t vertex that one of k remaining collections must carry."""
    return max(0, t - (k - 1)), min(1, t)


def _peel(rest: _Remainder, k: int, forbidden: FrozenSet[Edge]) -> Optional[_Remainder]:
    """One unit-throughput sub-flow leaving a remainder with throughput ≤ k−1."""
    arcs: List[BoundedArc] = []
    for v, t in sorted(rest.through.items()):
        lo, hi = _window(t, k)
        arcs.append((("i", v), ("o", v), lo, hi))
    for e in sorted(rest.edges):
        arcs.append((("o", e.lo), ("i", e.hi), 0, 0 if e in forbidden else 1))
    for v, n in sorted(rest.emit.items()):
        lo, hi = _window(n, k)
        arcs.append((SRC, ("i", v), lo, hi))
    for v, n in sorted(rest.absorb.items()):
        lo, hi = _window(n, k)
        arcs.append((("o", v), SNK, lo, hi))

    flow = bounded_flow(arcs, SRC, SNK)
    if flow is None:
        return None
    edges = {e for e in rest.edges if flow[(("o", e.lo), ("i", e.hi))] > 0}
    emit = {v: 1 for v in rest.emit if flow[(SRC, ("i", v))] > 0}
    absorb = {v: 1 for v in rest.absorb if flow[(("o", v), SNK)] > 0}
    through = {v: 1 for v in rest.through if flow[(("i", v), ("o", v))] > 0}
    return _Remainder(edges, emit, absorb, through)


def _split(rest: _Remainder, k: int, d: int, budget: List[int]) -> Optional[List[FlowSolution]]:
    if k == 1:
        return [rest.as_solution(d)]
    g = _peel(rest, k, frozenset())
    if g is None:
        return None
    tail = _split(rest.minus(g), k - 1, d, budget)
    if tail is not None:
        return [g.as_solution(d)] + tail
    # backtrack: re-peel with one edge of the failed peel forbidden
    for e in sorted(g.edges):
        if budget[0] <= 0:
            break
        budget[0] -= 1
        alt = _peel(rest, k, frozenset([e]))
        if alt is None:
            continue
        tail = _split(rest.minus(alt), k - 1, d, budget)
        if tail is not None:
            return [alt.as_solution(d)] + tail
    return None


def split_flow_collections(
    problem: FlowProblem, flow: FlowSolution, m: int, max_backtracks: int = 64
) -> List[FlowSolution]:
    """
    Split a 0/1 flow with vertex throughput ≤ m, whose terminals each emit or
    absorb at most m units, into m flows of vertex throughput ≤ 1. Each round
    peels one collection as a bounded flow on the support network.
    """
    if m < 1:
        raise PreconditionError(f"need at least one collection, got {m}")
    rest = _Remainder.of(flow)
    d = problem.d
    if any(n > 1 for n in flow.edge_load().values()):
        raise PreconditionError("split needs edge flows in {0, 1}")
    if any(n > m for n in rest.through.values()):
        raise PreconditionError(f"split needs vertex throughput ≤ {m}")

    parts = _split(rest, m, d, [max_backtracks])
    if parts is None:
        instance = dict(problem.describe())
        instance["flow"] = flow.to_json()
        instance["collections"] = m
        log.error("split into %d collections failed on %s", m, instance)
        raise SplitFailure(instance, f"no split into {m} vertex-disjoint collections")
    return parts


def split_flow_two_collections(problem: FlowProblem, flow: FlowSolution) -> Tuple[FlowSolution, FlowSolution]:
    first, second = split_flow_collections(problem, flow, 2)
    return first, second


# ---------------------------
# Gateway diagnostics
# ---------------------------

@dataclass(frozen=True)
class GatewayContext:
    problem: FlowProblem
    paths: FlowSolution
    cut: CutCertificate
    partition: CutPartition

    @property
    def cover(self) -> CoverGraph:
        return self.problem.graph

    @property
    def d(self) -> int:
        return self.problem.d

    @staticmethod
    def build(
        problem: FlowProblem,
        paths: Optional[FlowSolution] = None,
        cut: Optional[CutCertificate] = None,
        strict: bool = True,
    ) -> "GatewayContext":
        """Missing paths/cut come from one solve; strict=False admits hand-made partial cuts."""
        if paths is None or cut is None:
            sol, mc = solve(problem)
            paths = sol if paths is None else paths
            cut = mc if cut is None else cut
        return GatewayContext(problem, paths, cut, partition_by_cut(problem, cut, strict=strict))

    def vertex_only(self) -> bool:
        caps = self.problem.uniform_caps()
        return caps is not None and is_inf(caps[1])

    def path_edges(self) -> FrozenSet[Edge]:
        return frozenset(self.paths.edge_load())


def gateways(ctx: GatewayContext, k: int) -> FrozenSet[Vertex]:
    """
    Layer-k vertices on the source side that lie on at most one path (no path
    in the vertex-only network) and still have an uncut edge leaving them.
    """
    limit = 0 if ctx.vertex_only() else 1
    load = ctx.paths.vertex_load()
    out = set()
    for v in ctx.cover.layer(k):
        if v not in ctx.partition.s_side or load.get(v, 0) > limit:
            continue
        if any(e not in ctx.cut.F for e in ctx.cover.out_edges(v)):
            out.add(v)
    return frozenset(out)


def gateway_profile(ctx: GatewayContext) -> Dict[int, FrozenSet[Vertex]]:
    lo, hi = ctx.cover.src_layer, ctx.cover.dst_layer
    if lo is None or hi is None:
        layers = sorted({weight(v) for v in ctx.cover.vertices})
    else:
        layers = list(range(lo, hi))
    return {k: gateways(ctx, k) for k in layers}


def cut_meets_terminals(ctx: GatewayContext) -> FrozenSet[Vertex]:
    return frozenset(ctx.cut.C & (ctx.problem.sources | ctx.problem.sinks))


def pink_edges(ctx: GatewayContext, r: int, within: Optional[CoverGraph] = None) -> FrozenSet[Edge]:
    """Path edges that do not flip coordinate r, optionally inside a subgraph."""
    check_coordinate(ctx.d, r)
    es = (e for e in ctx.path_edges() if e.dim != r)
    if within is not None:
        es = (e for e in es if e in within.edges)
    return frozenset(es)


def pink_count(ctx: GatewayContext, r: int, W: Iterable[Vertex], within: Optional[CoverGraph] = None) -> int:
    W = set(W)
    return sum(1 for e in pink_edges(ctx, r, within) if e.lo in W or e.hi in W)


@dataclass(frozen=True)
class StepSets:
    k: int
    r: int
    A: FrozenSet[Vertex]
    X: FrozenSet[Vertex]
    B: FrozenSet[Vertex]
    Y: FrozenSet[Vertex]
    graph: CoverGraph

    def sizes(self) -> Dict[str, int]:
        return {"A": len(self.A), "X": len(self.X), "B": len(self.B), "Y": len(self.Y)}

    def to_json(self) -> Dict[str, Any]:
        d = self.graph.d
        return {
            "k": self.k,
            "r": self.r,
            "A": format_set(d, self.A),
            "X": format_set(d, self.X),
            "B": format_set(d, self.B),
            "Y": format_set(d, self.Y),
            "sizes": self.sizes(),
        }


def gateway_step_sets(ctx: GatewayContext, v_star: Vertex, r: int) -> StepSets:
    """
    A: source-side layer-k vertices with coordinate r off whose r-flip is in
    the cover graph; X: their flips; B: path successors of X; Y: flips of B.
    """
    d = ctx.d
    check_coordinate(d, r)
    if coord(v_star, r) != 0:
        raise PreconditionError(f"coordinate {r} of {format_vertex(d, v_star)} must be 0")
    k = weight(v_star)
    A = frozenset(
        a for a in ctx.partition.s_side
        if weight(a) == k and coord(a, r) == 0 and project(d, a, r) in ctx.cover.vertices
    )
    X = frozenset(project(d, a, r) for a in A)
    B = set()
    for path in ctx.paths.paths:
        for a, b in zip(path, path[1:]):
            if a in X:
                B.add(b)
    B = frozenset(B)
    Y = frozenset(project(d, b, r) for b in B)
    return StepSets(k, r, A, X, B, Y, cover_graph(d, A, B))


@dataclass
class PinkClaims:
    counts: Dict[str, int] = field(default_factory=dict)
    a_equals_y: bool = False
    x_equals_b: bool = False


def pink_claims(ctx: GatewayContext, steps: StepSets) -> PinkClaims:
    """pink(A), pink(X), pink(B), pink(Y) inside G_{A,B}, with the two pairings."""
    counts = {
        name: pink_count(ctx, steps.r, W, within=steps.graph)
        for name, W in (("A", steps.A), ("X", steps.X), ("B", steps.B), ("Y", steps.Y))
    }
    return PinkClaims(counts, counts["A"] == counts["Y"], counts["X"] == counts["B"])
