from __future__ import annotations
from dataclasses import dataclass
from itertools import combinations
from typing import Dict, FrozenSet, Iterable, Iterator, List, NamedTuple, Optional, Sequence, Set

from kernel import DimensionError

# ---------------------------
# Encoding
# ---------------------------
# Coordinate i (1..d) lives in bit i-1. The text form is x_1 x_2 ... x_d,
# so the leftmost character is the lowest bit.

D_MAX = 20

Vertex = int


def check_dimension(d: int) -> int:
    if isinstance(d, bool) or not isinstance(d, int) or not (2 <= d <= D_MAX):
        raise DimensionError(f"dimension must satisfy 2 <= d <= {D_MAX}, got {d!r}")
    return d


def check_vertex(d: int, v: Vertex) -> Vertex:
    if not isinstance(v, int) or v < 0 or v >= (1 << d):
        raise DimensionError(f"vertex {v!r} is not in the {d}-cube")
    return v


def check_coordinate(d: int, r: int) -> int:
    if not isinstance(r, int) or not (1 <= r <= d):
        raise DimensionError(f"coordinate must satisfy 1 <= r <= {d}, got {r!r}")
    return r


def weight(v: Vertex) -> int:
    """Hamming weight, i.e. the layer index of v."""
    return bin(v).count("1")


def bit(r: int) -> int:
    return 1 << (r - 1)


def coord(v: Vertex, r: int) -> int:
    return (v >> (r - 1)) & 1


def format_vertex(d: int, v: Vertex) -> str:
    return "".join("1" if (v >> i) & 1 else "0" for i in range(d))


def parse_vertex(s: str, d: Optional[int] = None) -> Vertex:
    s = s.strip()
    if not s or any(ch not in "01" for ch in s):
        raise DimensionError(f"not a bitstring: {s!r}")
    if d is not None and len(s) != d:
        raise DimensionError(f"bitstring {s!r} has length {len(s)}, expected {d}")
    return sum(1 << i for i, ch in enumerate(s) if ch == "1")


def format_set(d: int, vs: Iterable[Vertex]) -> List[str]:
    return [format_vertex(d, v) for v in sorted(vs)]


def parse_set(items: Iterable[str], d: int) -> FrozenSet[Vertex]:
    return frozenset(parse_vertex(s, d) for s in items)


# ---------------------------
# Edges
# ---------------------------

class Edge(NamedTuple):
    lo: Vertex
    hi: Vertex
    dim: int

    def fmt(self, d: int) -> List[str]:
        return [format_vertex(d, self.lo), format_vertex(d, self.hi)]


def make_edge(lo: Vertex, hi: Vertex) -> Edge:
    diff = lo ^ hi
    if diff == 0 or diff & (diff - 1) or (hi & diff) == 0:
        raise DimensionError(f"({lo}, {hi}) is not an upward hypercube edge")
    return Edge(lo, hi, diff.bit_length())


def up_edges(d: int, v: Vertex) -> Iterator[Edge]:
    """Edges leaving v, in increasing coordinate order."""
    for r in range(1, d + 1):
        b = 1 << (r - 1)
        if not v & b:
            yield Edge(v, v | b, r)


def down_edges(d: int, v: Vertex) -> Iterator[Edge]:
    for r in range(1, d + 1):
        b = 1 << (r - 1)
        if v & b:
            yield Edge(v ^ b, v, r)


# ---------------------------
# Layers, order, projection
# ---------------------------

def layer(d: int, i: int) -> FrozenSet[Vertex]:
    check_dimension(d)
    if not isinstance(i, int) or not (0 <= i <= d):
        raise DimensionError(f"layer index must satisfy 0 <= i <= {d}, got {i!r}")
    out = set()
    for ones in combinations(range(d), i):
        out.add(sum(1 << k for k in ones))
    return frozenset(out)


def precedes(x: Vertex, y: Vertex, d: Optional[int] = None, strict: bool = False) -> bool:
    """x ⪯ y coordinatewise (x ≺ y when strict)."""
    if d is not None:
        check_vertex(d, x)
        check_vertex(d, y)
    if strict and x == y:
        return False
    return x & y == x


def project(d: int, x: Vertex, r: int) -> Vertex:
    """Flip coordinate r."""
    check_vertex(d, x)
    check_coordinate(d, r)
    return x ^ (1 << (r - 1))


def is_level_set(vs: Iterable[Vertex]) -> Optional[int]:
    layers = {weight(v) for v in vs}
    if len(layers) == 1:
        return layers.pop()
    return None


# ---------------------------
# Cover graphs
# ---------------------------

@dataclass(frozen=True)
class CoverGraph:
    """
    The union of all monotone paths from S to T. Also used for the whole cube.
    src_layer/dst_layer are set only when S (resp. T) is a level set.
    """
    d: int
    vertices: FrozenSet[Vertex]
    edges: FrozenSet[Edge]
    src_layer: Optional[int] = None
    dst_layer: Optional[int] = None

    def __contains__(self, v: object) -> bool:
        return v in self.vertices

    def __len__(self) -> int:
        return len(self.vertices)

    def is_empty(self) -> bool:
        return not self.vertices

    def out_edges(self, v: Vertex) -> List[Edge]:
        return [e for e in up_edges(self.d, v) if e.hi in self.vertices]

    def in_edges(self, v: Vertex) -> List[Edge]:
        return [e for e in down_edges(self.d, v) if e.lo in self.vertices]

    def layer(self, k: int) -> FrozenSet[Vertex]:
        return frozenset(v for v in self.vertices if weight(v) == k)

    def to_json(self) -> Dict[str, object]:
        return {
            "d": self.d,
            "vertices": format_set(self.d, self.vertices),
            "edges": [e.fmt(self.d) for e in sorted(self.edges)],
        }


def submasks(mask: int) -> Iterator[int]:
    """Every m with m & mask == m, mask first, 0 last."""
    m = mask
    while True:
        yield m
        if m == 0:
            return
        m = (m - 1) & mask


def interval(lo: Vertex, hi: Vertex) -> Iterator[Vertex]:
    """The vertices v with lo ⪯ v ⪯ hi (empty unless lo ⪯ hi)."""
    if lo & hi != lo:
        return
    for m in submasks(hi & ~lo):
        yield lo | m


def _extremes(vs: Set[Vertex], upward: bool) -> List[Vertex]:
    # minimal elements when upward, maximal otherwise
    if upward:
        return [v for v in vs if not any(u != v and u & v == u for u in vs)]
    return [v for v in vs if not any(u != v and u & v == v for u in vs)]


def _cover_vertices(S: Iterable[Vertex], T: Iterable[Vertex]) -> FrozenSet[Vertex]:
    """Up-set of S meets down-set of T: the union of intervals [s, t]."""
    lows = _extremes(set(S), upward=True)
    highs = _extremes(set(T), upward=False)
    return frozenset(v for s in lows for t in highs for v in interval(s, t))


def _induced_edges(d: int, vertices: FrozenSet[Vertex]) -> FrozenSet[Edge]:
    return frozenset(e for v in vertices for e in up_edges(d, v) if e.hi in vertices)


def cover_graph(d: int, S: Iterable[Vertex], T: Iterable[Vertex]) -> CoverGraph:
    check_dimension(d)
    S = [check_vertex(d, s) for s in S]
    T = [check_vertex(d, t) for t in T]
    verts = _cover_vertices(S, T)
    return CoverGraph(
        d=d,
        vertices=verts,
        edges=_induced_edges(d, verts),
        src_layer=is_level_set(S),
        dst_layer=is_level_set(T),
    )


def full_cube(d: int) -> CoverGraph:
    check_dimension(d)
    verts = frozenset(range(1 << d))
    return CoverGraph(d=d, vertices=verts, edges=_induced_edges(d, verts), src_layer=0, dst_layer=d)


def is_monotone_path(d: int, path: Sequence[Vertex]) -> bool:
    for a, b in zip(path, path[1:]):
        diff = a ^ b
        if diff == 0 or diff & (diff - 1) or (b & diff) == 0:
            return False
    return True


def path_edges(path: Sequence[Vertex]) -> List[Edge]:
    return [make_edge(a, b) for a, b in zip(path, path[1:])]
