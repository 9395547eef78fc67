from __future__ import annotations
from dataclasses import dataclass, field
from typing import Any, Dict, FrozenSet, Iterable, List, Mapping, Optional, Sequence, Tuple, Union
import logging

import networkx as nx
from networkx.algorithms.flow import dinitz

from hypercube import (
    CoverGraph,
    Edge,
    Vertex,
    check_vertex,
    cover_graph,
    format_set,
    format_vertex,
    full_cube,
    is_monotone_path,
    make_edge,
    parse_vertex,
    path_edges,
)
from kernel import (
    INF,
    Capacity,
    InvalidCut,
    NotOptimal,
    PreconditionError,
    capacity_to_json,
    check_capacity,
    is_inf,
)

log = logging.getLogger(__name__)

CapacitySpec = Union[Capacity, Mapping[Any, Capacity]]

SRC = "Ⓢ"
SNK = "Ⓣ"


# ---------------------------
# Problem / solution / certificate types
# ---------------------------

@dataclass(frozen=True)
class FlowProblem:
    """
    A capacitated network on a hypercube subgraph. Supernodes Ⓢ → S and
    T → Ⓣ are implicit and infinite. vcap/ecap are a uniform capacity or a
    mapping (missing keys fall back to `default_vcap`/`default_ecap`).
    """
    graph: CoverGraph
    sources: FrozenSet[Vertex]
    sinks: FrozenSet[Vertex]
    vcap: CapacitySpec = INF
    ecap: CapacitySpec = INF
    default_vcap: Capacity = INF
    default_ecap: Capacity = INF

    @property
    def d(self) -> int:
        return self.graph.d

    @staticmethod
    def on_cover(d: int, S: Iterable[Vertex], T: Iterable[Vertex], vcap: CapacitySpec = INF, ecap: CapacitySpec = INF) -> "FlowProblem":
        S, T = frozenset(S), frozenset(T)
        G = cover_graph(d, S, T)
        return FlowProblem(G, S & G.vertices, T & G.vertices, vcap, ecap)

    @staticmethod
    def on_cube(d: int, S: Iterable[Vertex], T: Optional[Iterable[Vertex]] = None, vcap: CapacitySpec = INF, ecap: CapacitySpec = INF) -> "FlowProblem":
        """Whole-cube network; sinks default to the complement of S."""
        S = frozenset(check_vertex(d, s) for s in S)
        G = full_cube(d)
        T = G.vertices - S if T is None else frozenset(check_vertex(d, t) for t in T)
        return FlowProblem(G, S, T, vcap, ecap)

    def vcap_of(self, v: Vertex) -> Capacity:
        if isinstance(self.vcap, Mapping):
            return check_capacity(self.vcap.get(v, self.default_vcap), "vertex capacity")
        return check_capacity(self.vcap, "vertex capacity")

    def ecap_of(self, e: Edge) -> Capacity:
        if isinstance(self.ecap, Mapping):
            return check_capacity(self.ecap.get(e, self.default_ecap), "edge capacity")
        return check_capacity(self.ecap, "edge capacity")

    def uniform_caps(self) -> Optional[Tuple[Capacity, Capacity]]:
        if isinstance(self.vcap, Mapping) or isinstance(self.ecap, Mapping):
            return None
        return self.vcap, self.ecap

    def describe(self) -> Dict[str, Any]:
        d = self.d
        out: Dict[str, Any] = {
            "d": d,
            "S": format_set(d, self.sources),
            "T": format_set(d, self.sinks),
            "vertices": len(self.graph.vertices),
        }
        caps = self.uniform_caps()
        if caps is not None:
            out["vcap"] = capacity_to_json(caps[0])
            out["ecap"] = capacity_to_json(caps[1])
        return out


@dataclass(frozen=True)
class FlowSolution:
    value: int
    arc_flow: Mapping[Edge, int]
    paths: Tuple[Tuple[Vertex, ...], ...]
    d: int = 0

    @staticmethod
    def empty(d: int = 0) -> "FlowSolution":
        return FlowSolution(0, {}, (), d)

    def vertex_load(self) -> Dict[Vertex, int]:
        load: Dict[Vertex, int] = {}
        for p in self.paths:
            for v in p:
                load[v] = load.get(v, 0) + 1
        return load

    def edge_load(self) -> Dict[Edge, int]:
        load: Dict[Edge, int] = {}
        for p in self.paths:
            for e in path_edges(p):
                load[e] = load.get(e, 0) + 1
        return load

    def to_json(self) -> Dict[str, Any]:
        return {"value": self.value, "paths": [[format_vertex(self.d, v) for v in p] for p in self.paths]}


@dataclass(frozen=True)
class CutCertificate:
    C: FrozenSet[Vertex]
    F: FrozenSet[Edge]
    value: Capacity
    d: int = 0

    def to_json(self) -> Dict[str, Any]:
        d = self.d
        return {
            "C": format_set(d, self.C),
            "F": [e.fmt(d) for e in sorted(self.F)],
            "value": capacity_to_json(self.value),
        }

    @staticmethod
    def from_json(obj: Mapping[str, Any], p: "FlowProblem") -> "CutCertificate":
        d = p.d
        C = frozenset(parse_vertex(v, d) for v in obj.get("C", []))
        F = frozenset(make_edge(parse_vertex(a, d), parse_vertex(b, d)) for a, b in obj.get("F", []))
        return make_cut(p, C, F)


@dataclass(frozen=True)
class CutPartition:
    s_side: FrozenSet[Vertex]
    cut: FrozenSet[Vertex]
    t_side: FrozenSet[Vertex]
    residue: FrozenSet[Vertex] = frozenset()


def cut_value(p: FlowProblem, C: Iterable[Vertex], F: Iterable[Edge]) -> Capacity:
    return sum(p.vcap_of(v) for v in C) + sum(p.ecap_of(e) for e in F)


def make_cut(p: FlowProblem, C: Iterable[Vertex], F: Iterable[Edge]) -> CutCertificate:
    C, F = frozenset(C), frozenset(F)
    return CutCertificate(C, F, cut_value(p, C, F), p.d)


# ---------------------------
# Split network
# ---------------------------
# A finite-capacity vertex v becomes the arc ("i", v) -> ("o", v) of capacity
# vcap(v); infinite vertices stay a single node ("v", v).

def _in(p: FlowProblem, v: Vertex) -> tuple:
    return ("v", v) if is_inf(p.vcap_of(v)) else ("i", v)


def _out(p: FlowProblem, v: Vertex) -> tuple:
    return ("v", v) if is_inf(p.vcap_of(v)) else ("o", v)


def build_network(p: FlowProblem) -> nx.DiGraph:
    G = nx.DiGraph()
    G.add_node(SRC)
    G.add_node(SNK)
    for v in sorted(p.graph.vertices):
        c = p.vcap_of(v)
        if is_inf(c):
            G.add_node(("v", v))
        else:
            G.add_edge(("i", v), ("o", v), capacity=c)
    for e in sorted(p.graph.edges):
        c = p.ecap_of(e)
        if is_inf(c):
            G.add_edge(_out(p, e.lo), _in(p, e.hi))
        else:
            G.add_edge(_out(p, e.lo), _in(p, e.hi), capacity=c)
    for s in sorted(p.sources):
        G.add_edge(SRC, _in(p, s))
    for t in sorted(p.sinks):
        G.add_edge(_out(p, t), SNK)
    return G


def _residual(p: FlowProblem) -> nx.DiGraph:
    G = build_network(p)
    try:
        return dinitz(G, SRC, SNK)
    except nx.NetworkXUnbounded as exc:
        raise PreconditionError("unbounded network: some S→T path has only infinite capacities") from exc


def _arc_flow(R: nx.DiGraph, u: Any, v: Any) -> int:
    if R.has_edge(u, v):
        return max(0, int(R[u][v]["flow"]))
    return 0


# ---------------------------
# Path decomposition
# ---------------------------

def decompose_paths(
    arc_flow: Mapping[Edge, int],
    emit: Mapping[Vertex, int],
    absorb: Mapping[Vertex, int],
) -> List[Tuple[Vertex, ...]]:
    """
    Peel unit paths: start at the smallest vertex still emitting, stop as soon
    as the current vertex still absorbs, otherwise step to the smallest
    successor with remaining flow.
    """
    out: Dict[Vertex, Dict[Vertex, int]] = {}
    for e, f in arc_flow.items():
        if f > 0:
            out.setdefault(e.lo, {})[e.hi] = f
    emit = {v: f for v, f in emit.items() if f > 0}
    absorb = {v: f for v, f in absorb.items() if f > 0}
    paths: List[Tuple[Vertex, ...]] = []
    while emit:
        s = min(emit)
        emit[s] -= 1
        if not emit[s]:
            del emit[s]
        path = [s]
        v = s
        while absorb.get(v, 0) == 0:
            nxt = out.get(v)
            if not nxt:
                raise RuntimeError(f"flow conservation broken at vertex {v}")
            w = min(nxt)
            nxt[w] -= 1
            if not nxt[w]:
                del nxt[w]
            path.append(w)
            v = w
        absorb[v] -= 1
        if not absorb[v]:
            del absorb[v]
        paths.append(tuple(path))
    return paths


# ---------------------------
# Solve
# ---------------------------

def solve(p: FlowProblem) -> Tuple[FlowSolution, CutCertificate]:
    """One Dinic run: the max flow, its decomposition, and the source-side min cut."""
    R = _residual(p)
    value = int(R.graph["flow_value"])

    arc_flow: Dict[Edge, int] = {}
    for e in p.graph.edges:
        f = _arc_flow(R, _out(p, e.lo), _in(p, e.hi))
        if f:
            arc_flow[e] = f
    emit = {s: _arc_flow(R, SRC, _in(p, s)) for s in p.sources}
    absorb = {t: _arc_flow(R, _out(p, t), SNK) for t in p.sinks}
    paths = decompose_paths(arc_flow, emit, absorb)
    sol = FlowSolution(value, arc_flow, tuple(paths), p.d)

    # source side = reachable from Ⓢ in the final residual graph
    spare = nx.subgraph_view(R, filter_edge=lambda u, w: R[u][w]["capacity"] - R[u][w]["flow"] > 0)
    reach = nx.descendants(spare, SRC) | {SRC}
    C = frozenset(v for v in p.graph.vertices if _in(p, v) in reach and _out(p, v) not in reach)
    F = frozenset(e for e in p.graph.edges if _out(p, e.lo) in reach and _in(p, e.hi) not in reach)
    cut = make_cut(p, C, F)
    if cut.value != value:
        raise RuntimeError(f"duality gap: flow {value} vs cut {cut.value}")
    log.debug("solved %s: value %d, |C|=%d, |F|=%d", p.describe(), value, len(C), len(F))
    return sol, cut


def max_flow(p: FlowProblem) -> FlowSolution:
    return solve(p)[0]


def min_cut(p: FlowProblem) -> CutCertificate:
    return solve(p)[1]


def max_flow_value(p: FlowProblem) -> int:
    return int(_residual(p).graph["flow_value"])


# ---------------------------
# Cuts: validity, partition, normalization
# ---------------------------

def terminal_graph(p: FlowProblem) -> nx.DiGraph:
    """The cover graph as a DiGraph with Ⓢ → S and T → Ⓣ attached."""
    G = nx.DiGraph()
    G.add_nodes_from((SRC, SNK))
    G.add_nodes_from(p.graph.vertices)
    G.add_edges_from((e.lo, e.hi) for e in p.graph.edges)
    G.add_edges_from((SRC, s) for s in p.sources)
    G.add_edges_from((t, SNK) for t in p.sinks)
    return G


def _cut_free_view(p: FlowProblem, C: FrozenSet[Vertex], F: FrozenSet[Edge]) -> nx.DiGraph:
    cut_arcs = {(e.lo, e.hi) for e in F}
    return nx.subgraph_view(
        terminal_graph(p),
        filter_node=lambda v: v not in C,
        filter_edge=lambda u, w: (u, w) not in cut_arcs,
    )


def _cut_free_path(p: FlowProblem, C: FrozenSet[Vertex], F: FrozenSet[Edge]) -> Optional[List[Vertex]]:
    view = _cut_free_view(p, C, F)
    try:
        path = nx.shortest_path(view, SRC, SNK)
    except nx.NetworkXNoPath:
        return None
    return path[1:-1]


def is_valid_cut(p: FlowProblem, c: CutCertificate) -> bool:
    return _cut_free_path(p, c.C, c.F) is None


def partition_by_cut(p: FlowProblem, c: CutCertificate, strict: bool = True) -> CutPartition:
    """
    𝒮 = reached from Ⓢ by cut-free paths, 𝒯 = reaching Ⓣ by cut-free paths,
    everything else joins the cut part. strict=False skips the validity check
    (diagnostic contexts built from partial data).
    """
    C, F = c.C, c.F
    if strict:
        witness = _cut_free_path(p, C, F)
        if witness is not None:
            shown = " -> ".join(format_vertex(p.d, v) for v in witness)
            raise InvalidCut(f"cut is invalid: path {shown} is cut-free", witness)

    view = _cut_free_view(p, C, F)
    s_side = nx.descendants(view, SRC) - {SNK}
    t_side = nx.ancestors(view, SNK) - {SRC} - s_side

    if strict:
        for e in p.graph.edges:
            if e.lo in s_side and e.hi in t_side and e not in F:
                raise InvalidCut(f"edge {e.fmt(p.d)} joins the two sides but is not cut", [e.lo, e.hi])

    residue = frozenset(p.graph.vertices - s_side - t_side - C)
    return CutPartition(frozenset(s_side), frozenset(C & p.graph.vertices) | residue, frozenset(t_side), residue)


def normalize_cut(p: FlowProblem, c: CutCertificate) -> CutCertificate:
    """
    While a vertex v meets two or more F-edges, drop those edges and cut v
    instead, as long as vcap(v) does not exceed their total capacity.

    The value never grows. Under uniform capacities with vcap ≤ 2·ecap (the
    vcap=2, ecap=1 routing networks among them) no vertex is skipped and the
    output has each vertex on at most one F-edge. A vertex with vcap above
    its incident F capacity (vcap=∞ in particular) keeps its F-edges.
    """
    if not is_valid_cut(p, c):
        raise InvalidCut("normalize_cut needs a valid cut")
    C = set(c.C)
    F = set(c.F)
    changed = True
    while changed:
        changed = False
        incident: Dict[Vertex, List[Edge]] = {}
        for e in F:
            incident.setdefault(e.lo, []).append(e)
            incident.setdefault(e.hi, []).append(e)
        for v in sorted(incident):
            es = incident[v]
            if len(es) < 2:
                continue
            if p.vcap_of(v) > sum(p.ecap_of(e) for e in es):
                log.debug("normalize_cut keeps %d F-edges at %s: vertex capacity too large", len(es), format_vertex(p.d, v))
                continue
            F.difference_update(es)
            C.add(v)
            changed = True
            break
    return make_cut(p, C, F)


# ---------------------------
# Complementary slackness
# ---------------------------

@dataclass
class SlacknessReport:
    ok: bool
    violation: Optional[str] = None
    details: Dict[str, Any] = field(default_factory=dict)


def verify_complementary_slackness(p: FlowProblem, sol: FlowSolution, c: CutCertificate) -> SlacknessReport:
    """
    For an optimal (flow, cut) pair: every path starts in S, ends in T and
    meets exactly one cut element; every C-vertex carries vcap paths and every
    F-edge carries ecap paths; no capacity is exceeded.
    """
    if sol.value != c.value:
        raise NotOptimal(f"not optimal pair: flow {sol.value} != cut {c.value}")
    d = p.d
    vload = sol.vertex_load()
    eload = sol.edge_load()

    for path in sol.paths:
        shown = [format_vertex(d, v) for v in path]
        if path[0] not in p.sources or path[-1] not in p.sinks:
            return SlacknessReport(False, f"path {shown} does not run from S to T")
        if not is_monotone_path(d, path):
            return SlacknessReport(False, f"path {shown} is not monotone")
        hits = sum(1 for v in path if v in c.C) + sum(1 for e in path_edges(path) if e in c.F)
        if hits != 1:
            return SlacknessReport(False, f"path {shown} meets {hits} cut elements", {"path": shown})
    for v, n in vload.items():
        if n > p.vcap_of(v):
            return SlacknessReport(False, f"vertex {format_vertex(d, v)} carries {n} paths over capacity")
    for e, n in eload.items():
        if n > p.ecap_of(e):
            return SlacknessReport(False, f"edge {e.fmt(d)} carries {n} paths over capacity")
    for v in sorted(c.C):
        if vload.get(v, 0) != p.vcap_of(v):
            return SlacknessReport(False, f"cut vertex {format_vertex(d, v)} lies on {vload.get(v, 0)} paths, expected {p.vcap_of(v)}")
    for e in sorted(c.F):
        if eload.get(e, 0) != p.ecap_of(e):
            return SlacknessReport(False, f"cut edge {e.fmt(d)} lies on {eload.get(e, 0)} paths, expected {p.ecap_of(e)}")
    return SlacknessReport(True, None, {"paths": len(sol.paths), "C": len(c.C), "F": len(c.F)})


def check_decomposition(p: FlowProblem, sol: FlowSolution) -> Optional[str]:
    """First soundness problem of a decomposition, or None."""
    if len(sol.paths) != sol.value:
        return f"{len(sol.paths)} paths for flow value {sol.value}"
    for path in sol.paths:
        if path[0] not in p.sources or path[-1] not in p.sinks or not is_monotone_path(p.d, path):
            return f"bad path {[format_vertex(p.d, v) for v in path]}"
    for v, n in sol.vertex_load().items():
        if n > p.vcap_of(v):
            return f"vertex {format_vertex(p.d, v)} over capacity"
    for e, n in sol.edge_load().items():
        if n > p.ecap_of(e):
            return f"edge {e.fmt(p.d)} over capacity"
    return None


def paths_from_json(d: int, rows: Sequence[Sequence[str]]) -> Tuple[Tuple[Vertex, ...], ...]:
    return tuple(tuple(parse_vertex(v, d) for v in row) for row in rows)


# ---------------------------
# Flows with lower bounds
# ---------------------------

_SS = "Ⓢ'"
_TT = "Ⓣ'"

BoundedArc = Tuple[Any, Any, int, Capacity]


def bounded_flow(arcs: Sequence[BoundedArc], s: Any, t: Any) -> Optional[Dict[Tuple[Any, Any], int]]:
    """
    A feasible integral s→t flow with lo ≤ flow ≤ hi on every arc, or None.
    Reduced to one max flow: close the circulation with t→s, move lower bounds
    into node excesses and saturate them from a second pair of supernodes.
    Arcs must be distinct (u, v) pairs and must not contain t→s.
    """
    G = nx.DiGraph()
    G.add_nodes_from((s, t, _SS, _TT))
    excess: Dict[Any, int] = {}
    for u, v, lo, hi in arcs:
        if hi < lo:
            return None
        if is_inf(hi):
            G.add_edge(u, v)
        else:
            G.add_edge(u, v, capacity=int(hi - lo))
        excess[v] = excess.get(v, 0) + lo
        excess[u] = excess.get(u, 0) - lo
    G.add_edge(t, s)

    need = 0
    for v, x in excess.items():
        if x > 0:
            G.add_edge(_SS, v, capacity=x)
            need += x
        elif x < 0:
            G.add_edge(v, _TT, capacity=-x)
    if need == 0:
        return {(u, v): lo for u, v, lo, _ in arcs}

    value, flow = nx.maximum_flow(G, _SS, _TT)
    if value < need:
        return None
    return {(u, v): lo + int(flow[u][v]) for u, v, lo, _ in arcs}
