from __future__ import annotations
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from typing import Any, Dict, FrozenSet, Iterable, Iterator, List, Mapping, Optional, Sequence, Tuple
import logging

import networkx as nx
from networkx.algorithms import bipartite

from hypercube import (
    Vertex,
    check_dimension,
    check_vertex,
    format_vertex,
    layer,
    parse_vertex,
    precedes,
    weight,
)
from kernel import DimensionError, NoCertificate, PreconditionError

log = logging.getLogger(__name__)


# ---------------------------
# Matched pairs
# ---------------------------

@dataclass(frozen=True)
class MatchedPair:
    """(S, T; φ). phi is a tuple of (s, φ(s)) pairs sorted by s."""
    d: int
    S: FrozenSet[Vertex]
    T: FrozenSet[Vertex]
    phi: Tuple[Tuple[Vertex, Vertex], ...]

    @staticmethod
    def from_phi(d: int, phi: Iterable[Tuple[Vertex, Vertex]]) -> "MatchedPair":
        pairs = tuple(sorted((int(s), int(t)) for s, t in phi))
        return MatchedPair(d, frozenset(s for s, _ in pairs), frozenset(t for _, t in pairs), pairs)

    @staticmethod
    def empty(d: int) -> "MatchedPair":
        return MatchedPair(d, frozenset(), frozenset(), ())

    def __len__(self) -> int:
        return len(self.phi)

    def mapping(self) -> Dict[Vertex, Vertex]:
        return dict(self.phi)

    def to_json(self) -> Dict[str, Any]:
        d = self.d
        return {
            "d": d,
            "S": [format_vertex(d, s) for s in sorted(self.S)],
            "T": [format_vertex(d, t) for t in sorted(self.T)],
            "phi": [[format_vertex(d, s), format_vertex(d, t)] for s, t in self.phi],
        }

    @staticmethod
    def from_json(obj: Mapping[str, Any]) -> "MatchedPair":
        try:
            d = int(obj["d"])
            phi = [(parse_vertex(a, d), parse_vertex(b, d)) for a, b in obj["phi"]]
        except (KeyError, TypeError, ValueError) as exc:
            raise PreconditionError(f"not a matched pair: {exc}") from exc
        check_dimension(d)
        S = frozenset(parse_vertex(s, d) for s in obj.get("S", [s for s, _ in obj["phi"]]))
        T = frozenset(parse_vertex(t, d) for t in obj.get("T", [t for _, t in obj["phi"]]))
        return MatchedPair(d, S, T, tuple(sorted(phi)))


@dataclass(frozen=True)
class VolumeCertificate:
    pair: MatchedPair
    value: int

    def to_json(self) -> Dict[str, Any]:
        return {"value": self.value, "pair": self.pair.to_json()}


def validate_matched_pair(p: MatchedPair) -> Tuple[bool, Optional[str]]:
    """(ok, first violation). Never raises."""
    d = p.d
    try:
        check_dimension(d)
        for s, t in p.phi:
            check_vertex(d, s)
            check_vertex(d, t)
    except DimensionError as exc:
        return False, str(exc)
    seen_s: set = set()
    seen_t: set = set()
    for s, t in p.phi:
        if s in seen_s:
            return False, f"duplicate source {format_vertex(d, s)}"
        if t in seen_t:
            return False, f"duplicate target {format_vertex(d, t)}"
        seen_s.add(s)
        seen_t.add(t)
        if not precedes(s, t, strict=True):
            return False, f"{format_vertex(d, s)} is not strictly below {format_vertex(d, t)}"
    if seen_s != set(p.S):
        return False, "phi domain differs from S"
    if seen_t != set(p.T):
        return False, "phi image differs from T"
    return True, None


def require_valid(p: MatchedPair) -> MatchedPair:
    ok, why = validate_matched_pair(p)
    if not ok:
        raise PreconditionError(f"not a matched pair: {why}")
    return p


# ---------------------------
# Matchings over the comparability bigraph
# ---------------------------

def _comparability_bigraph(S: Iterable[Vertex], T: Iterable[Vertex]) -> Tuple[nx.Graph, List[tuple]]:
    G = nx.Graph()
    top = [("s", s) for s in sorted(S)]
    G.add_nodes_from(top)
    G.add_nodes_from(("t", t) for t in sorted(T))
    for _, s in top:
        for t in T:
            if s != t and s & t == s:
                G.add_edge(("s", s), ("t", t))
    return G, top


def max_comparability_matching(S: Iterable[Vertex], T: Iterable[Vertex]) -> List[Tuple[Vertex, Vertex]]:
    """Maximum matching of s ≺ t pairs (Hopcroft–Karp)."""
    G, top = _comparability_bigraph(S, T)
    if G.number_of_edges() == 0:
        return []
    m = bipartite.hopcroft_karp_matching(G, top_nodes=top)
    return sorted((s, m[("s", s)][1]) for _, s in top if ("s", s) in m)


def _targets(d: int, S: FrozenSet[Vertex], targets: Optional[Iterable[Vertex]]) -> FrozenSet[Vertex]:
    if targets is None:
        return frozenset(range(1 << d)) - S
    T = frozenset(check_vertex(d, t) for t in targets)
    if T & S:
        raise PreconditionError("targets must be disjoint from the source set")
    return T


def directed_volume(
    d: int, S: Iterable[Vertex], targets: Optional[Iterable[Vertex]] = None
) -> Tuple[int, VolumeCertificate]:
    """dirvol(S): the largest matched pair from inside S to its complement (or to targets)."""
    check_dimension(d)
    S = frozenset(check_vertex(d, s) for s in S)
    T = _targets(d, S, targets)
    if not S or not T:
        return 0, VolumeCertificate(MatchedPair.empty(d), 0)
    phi = max_comparability_matching(S, T)
    pair = MatchedPair.from_phi(d, phi)
    return len(phi), VolumeCertificate(pair, len(phi))


def separation_distance(p: MatchedPair) -> Fraction:
    """Average layer gap |S|^-1 Σ (|φ(s)| − |s|), exact."""
    require_valid(p)
    if not p.phi:
        raise PreconditionError("separation distance of an empty matched pair is undefined")
    gap = sum(weight(t) - weight(s) for s, t in p.phi)
    return Fraction(gap, len(p.phi))


def separation_distance_of_set(
    d: int, S: Iterable[Vertex], targets: Optional[Iterable[Vertex]] = None
) -> Tuple[Fraction, VolumeCertificate]:
    """
    Smallest separation distance over all directed volume certificates of S:
    a minimum-cost maximum matching with cost |t| − |s| per matched pair.
    """
    check_dimension(d)
    S = frozenset(check_vertex(d, s) for s in S)
    T = _targets(d, S, targets)

    G = nx.DiGraph()
    G.add_node("src")
    G.add_node("snk")
    for s in sorted(S):
        for t in sorted(T):
            if s & t == s and s != t:
                G.add_edge("src", ("s", s), capacity=1, weight=0)
                G.add_edge(("s", s), ("t", t), capacity=1, weight=weight(t) - weight(s))
                G.add_edge(("t", t), "snk", capacity=1, weight=0)
    if G.number_of_edges() == 0:
        raise NoCertificate("dirvol(S) = 0: S has no directed volume certificate")

    flow = nx.max_flow_min_cost(G, "src", "snk")
    phi = []
    for s in sorted(S):
        for node, f in flow.get(("s", s), {}).items():
            if f > 0:
                phi.append((s, node[1]))
    pair = MatchedPair.from_phi(d, phi)
    r = Fraction(sum(weight(t) - weight(s) for s, t in phi), len(phi))
    log.debug("separation distance %s over a certificate of size %d", r, len(phi))
    return r, VolumeCertificate(pair, len(phi))


def minimality_reduction(p: MatchedPair, C: Iterable[Vertex]) -> MatchedPair:
    """Drop every matched pair (s, φ(s)) with s or φ(s) in C."""
    C = set(C)
    return MatchedPair.from_phi(p.d, [(s, t) for s, t in p.phi if s not in C and t not in C])


# ---------------------------
# Enumeration of level matched pairs
# ---------------------------

def _has_perfect_matching(S: Sequence[Vertex], T: Sequence[Vertex]) -> bool:
    if len(S) != len(T):
        return False
    if not S:
        return True
    return len(max_comparability_matching(S, T)) == len(S)


def canonical_phi(S: Sequence[Vertex], T: Sequence[Vertex]) -> Optional[List[Tuple[Vertex, Vertex]]]:
    """Lexicographically smallest perfect matching by (s, t) encoding, or None."""
    S = sorted(S)
    T = sorted(T)
    if not _has_perfect_matching(S, T):
        return None
    phi: List[Tuple[Vertex, Vertex]] = []
    free = list(T)
    for idx, s in enumerate(S):
        rest = S[idx + 1:]
        for t in free:
            if s & t != s or s == t:
                continue
            remaining = [u for u in free if u != t]
            if _has_perfect_matching(rest, remaining):
                phi.append((s, t))
                free = remaining
                break
    return phi


def enumerate_level_matched_pairs(d: int, i: int, j: int, max_size: int) -> Iterator[MatchedPair]:
    """
    Every (S ⊆ L_i, T ⊆ L_j) with |S| = |T| ≤ max_size that admits a perfect
    comparability matching, with its canonical φ. Order: size, then S, then T
    (combinations of the sorted layers).
    """
    check_dimension(d)
    if not (0 <= i < j <= d):
        raise DimensionError(f"need 0 <= i < j <= d, got i={i}, j={j}, d={d}")
    Li = sorted(layer(d, i))
    Lj = sorted(layer(d, j))
    for size in range(1, min(max_size, len(Li), len(Lj)) + 1):
        for S in combinations(Li, size):
            # Hall's condition on singletons prunes most dead S
            ups = [[t for t in Lj if s & t == s] for s in S]
            if any(not u for u in ups):
                continue
            for T in combinations(Lj, size):
                Tset = set(T)
                if any(not Tset.intersection(u) for u in ups):
                    continue
                phi = canonical_phi(S, T)
                if phi is not None:
                    yield MatchedPair.from_phi(d, phi)


def enumerate_all_level_pairs(d: int, max_size: int, min_gap: int = 1) -> Iterator[MatchedPair]:
    for i in range(d + 1):
        for j in range(i + min_gap, d + 1):
            yield from enumerate_level_matched_pairs(d, i, j, max_size)
