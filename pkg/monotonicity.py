from __future__ import annotations
from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Dict, FrozenSet, Iterable, Iterator, List, Mapping, Optional, Tuple
import logging
import math
import random

import networkx as nx
from networkx.algorithms import bipartite

from hypercube import D_MAX, Edge, Vertex, check_dimension, check_vertex, up_edges, weight
from kernel import DimensionError, PreconditionError, fraction_to_json

log = logging.getLogger(__name__)

EXHAUSTIVE_EDGE_CAP = 24
MONOTONE_ENUM_MAX_D = 5


# ---------------------------
# Functions and colorings
# ---------------------------

@dataclass(frozen=True)
class BooleanFunction:
    """f: {0,1}^d → {0,1}; table[x] = f(x) with x the vertex integer."""
    d: int
    table: Tuple[int, ...]

    def __post_init__(self) -> None:
        check_dimension(self.d)
        if len(self.table) != 1 << self.d:
            raise DimensionError(f"truth table has length {len(self.table)}, expected 2^{self.d} = {1 << self.d}")
        if any(b not in (0, 1) for b in self.table):
            raise DimensionError("truth table entries must be 0 or 1")

    def __call__(self, x: Vertex) -> int:
        return self.table[x]

    @property
    def size(self) -> int:
        return 1 << self.d

    @staticmethod
    def from_bitstring(s: str, d: Optional[int] = None) -> "BooleanFunction":
        s = "".join(s.split())
        if any(ch not in "01" for ch in s):
            raise DimensionError(f"not a truth table: {s!r}")
        if d is None:
            d = max(len(s).bit_length() - 1, 0)
            if len(s) != 1 << d or not (2 <= d <= D_MAX):
                raise DimensionError(f"truth table length {len(s)} is not 2^d for any 2 <= d <= {D_MAX}")
        elif len(s) != 1 << d:
            raise DimensionError(f"truth table has length {len(s)}, expected 2^{d} = {1 << d}")
        return BooleanFunction(d, tuple(int(ch) for ch in s))

    @staticmethod
    def from_int(n: int, d: int) -> "BooleanFunction":
        """Bit x of n is f(x)."""
        check_dimension(d)
        if n < 0 or n >= 1 << (1 << d):
            raise DimensionError(f"{n} does not fit a truth table of length 2^{d}")
        return BooleanFunction(d, tuple((n >> x) & 1 for x in range(1 << d)))

    @staticmethod
    def from_hex(h: str, d: int) -> "BooleanFunction":
        h = h.strip().lower()
        if h.startswith("0x"):
            h = h[2:]
        try:
            n = int(h, 16)
        except ValueError as exc:
            raise DimensionError(f"not a hex truth table: {h!r}") from exc
        return BooleanFunction.from_int(n, d)

    @staticmethod
    def indicator(d: int, S: Iterable[Vertex]) -> "BooleanFunction":
        check_dimension(d)
        S = {check_vertex(d, s) for s in S}
        return BooleanFunction(d, tuple(1 if x in S else 0 for x in range(1 << d)))

    @staticmethod
    def random(d: int, seed: int = 0) -> "BooleanFunction":
        check_dimension(d)
        rng = random.Random(seed)
        return BooleanFunction(d, tuple(rng.randrange(2) for _ in range(1 << d)))

    def to_int(self) -> int:
        return sum(b << x for x, b in enumerate(self.table))

    def to_bitstring(self) -> str:
        return "".join(str(b) for b in self.table)

    def ones(self) -> FrozenSet[Vertex]:
        return frozenset(x for x, b in enumerate(self.table) if b)

    def zeros(self) -> FrozenSet[Vertex]:
        return frozenset(x for x, b in enumerate(self.table) if not b)

    def to_json(self) -> Dict[str, Any]:
        return {"d": self.d, "table": self.to_bitstring()}


@dataclass(frozen=True)
class EdgeColoring:
    """Colors of the violated edges only. Color 1 charges the edge to its 1-endpoint."""
    color: Mapping[Edge, int]

    @staticmethod
    def constant(f: BooleanFunction, c: int) -> "EdgeColoring":
        return EdgeColoring({e: c for e in violated_edges(f)})

    @staticmethod
    def from_bits(edges: Iterable[Edge], bits: int) -> "EdgeColoring":
        """Bit i of `bits` colors the i-th edge in sorted order."""
        return EdgeColoring({e: (bits >> i) & 1 for i, e in enumerate(sorted(edges))})

    def to_json(self, d: int) -> List[List[Any]]:
        return [e.fmt(d) + [c] for e, c in sorted(self.color.items())]


# ---------------------------
# Violations and influence
# ---------------------------

def violated_edges(f: BooleanFunction) -> FrozenSet[Edge]:
    """Hypercube edges (x, y), x ≺ y, with f(x) = 1 and f(y) = 0."""
    t = f.table
    return frozenset(e for x in range(f.size) if t[x] for e in up_edges(f.d, x) if not t[e.hi])


def is_monotone(f: BooleanFunction) -> bool:
    t = f.table
    return not any(t[x] and not t[e.hi] for x in range(f.size) for e in up_edges(f.d, x))


def directed_influence(f: BooleanFunction) -> Fraction:
    """2^-d Σ_x (violated edges at x); every violated edge counts at both ends."""
    return Fraction(2 * len(violated_edges(f)), f.size)


def violation_matching(f: BooleanFunction) -> List[Tuple[Vertex, Vertex]]:
    """Maximum matching of pairs x ≺ y with f(x) = 1, f(y) = 0."""
    ones = sorted(f.ones())
    zeros = f.zeros()
    G = nx.Graph()
    top = [("1", x) for x in ones]
    G.add_nodes_from(top)
    for x in ones:
        for y in zeros:
            if x & y == x and x != y:
                G.add_edge(("1", x), ("0", y))
    if G.number_of_edges() == 0:
        return []
    m = bipartite.hopcroft_karp_matching(G, top_nodes=top)
    return sorted((x, m[("1", x)][1]) for _, x in top if ("1", x) in m)


def distance_to_monotonicity(f: BooleanFunction) -> Fraction:
    return Fraction(len(violation_matching(f)), f.size)


def gamma_plus_count(f: BooleanFunction) -> int:
    """Largest set of vertex-disjoint violated edges."""
    viol = violated_edges(f)
    if not viol:
        return 0
    G = nx.Graph()
    G.add_edges_from((e.lo, e.hi) for e in viol)
    # the cube is bipartite by weight parity
    top = [v for v in G.nodes if weight(v) % 2 == 0]
    return len(bipartite.hopcroft_karp_matching(G, top_nodes=top)) // 2


def gamma_plus(f: BooleanFunction) -> Fraction:
    return Fraction(gamma_plus_count(f), f.size)


# ---------------------------
# Robust directed Talagrand objective
# ---------------------------

def charge_loads(f: BooleanFunction, chi: EdgeColoring) -> Dict[Vertex, int]:
    """d(x): violated edges at x whose color equals f(x)."""
    viol = violated_edges(f)
    if set(chi.color) != viol:
        raise PreconditionError("coloring must cover exactly the violated edges")
    load: Dict[Vertex, int] = {}
    for e, c in chi.color.items():
        x = e.lo if c == 1 else e.hi
        load[x] = load.get(x, 0) + 1
    return load


def talagrand_objective(f: BooleanFunction, chi: EdgeColoring) -> float:
    return math.fsum(math.sqrt(n) for n in charge_loads(f, chi).values()) / f.size


@dataclass(frozen=True)
class TalagrandResult:
    value: float
    coloring: EdgeColoring
    exact: bool
    mode: str


def _components(edges: Iterable[Edge]) -> List[List[Edge]]:
    G = nx.Graph()
    by_pair: Dict[Tuple[Vertex, Vertex], Edge] = {}
    for e in edges:
        G.add_edge(e.lo, e.hi)
        by_pair[(e.lo, e.hi)] = e
    comps = []
    for nodes in nx.connected_components(G):
        comps.append(sorted(e for (a, b), e in by_pair.items() if a in nodes))
    comps.sort()
    return comps


def _exhaustive_component(edges: List[Edge], sq: List[float]) -> Dict[Edge, int]:
    """Gray-code walk over all colorings of one component; start all-0."""
    load: Dict[Vertex, int] = {}
    for e in edges:
        load.setdefault(e.lo, 0)
        load[e.hi] = load.get(e.hi, 0) + 1
    colors = [0] * len(edges)
    value = sum(sq[n] for n in load.values())
    best, best_colors = value, list(colors)
    for i in range(1, 1 << len(edges)):
        k = (i & -i).bit_length() - 1
        e = edges[k]
        gain, lose = (e.lo, e.hi) if colors[k] == 0 else (e.hi, e.lo)
        value += sq[load[gain] + 1] - sq[load[gain]] + sq[load[lose] - 1] - sq[load[lose]]
        load[gain] += 1
        load[lose] -= 1
        colors[k] ^= 1
        if value < best - 1e-12:
            best, best_colors = value, list(colors)
    return dict(zip(edges, best_colors))


def _local_search(f: BooleanFunction, edges: List[Edge], sq: List[float], seed: int, restarts: int) -> Dict[Edge, int]:
    rng = random.Random(seed)
    best_value, best_colors = math.inf, None
    for _ in range(max(1, restarts)):
        colors = {e: rng.randrange(2) for e in edges}
        load: Dict[Vertex, int] = {}
        for e, c in colors.items():
            x = e.lo if c else e.hi
            load[x] = load.get(x, 0) + 1
        improved = True
        while improved:
            improved = False
            for e in edges:
                gain, lose = (e.lo, e.hi) if colors[e] == 0 else (e.hi, e.lo)
                delta = sq[load.get(gain, 0) + 1] - sq[load.get(gain, 0)] + sq[load[lose] - 1] - sq[load[lose]]
                if delta < -1e-12:
                    load[gain] = load.get(gain, 0) + 1
                    load[lose] -= 1
                    colors[e] ^= 1
                    improved = True
        value = math.fsum(sq[n] for n in load.values())
        if value < best_value - 1e-12:
            best_value, best_colors = value, dict(colors)
    return best_colors or {}


def min_talagrand(f: BooleanFunction, mode: str = "auto", seed: int = 0, restarts: int = 16) -> TalagrandResult:
    """
    Minimum of the Talagrand objective over colorings of the violated edges.
    exhaustive: exact, at most EXHAUSTIVE_EDGE_CAP violated edges, solved per
    connected component. local: seeded hill descent with restarts, an upper bound.
    """
    if mode == "local-search":
        mode = "local"
    if mode not in ("auto", "exhaustive", "local"):
        raise PreconditionError(f"unknown mode {mode!r}; use exhaustive, local-search or auto")
    edges = sorted(violated_edges(f))
    if mode == "auto":
        mode = "exhaustive" if len(edges) <= EXHAUSTIVE_EDGE_CAP else "local"
    if mode == "exhaustive" and len(edges) > EXHAUSTIVE_EDGE_CAP:
        raise PreconditionError(
            f"{len(edges)} violated edges exceed the exhaustive cap of {EXHAUSTIVE_EDGE_CAP}; use local-search"
        )
    sq = [math.sqrt(k) for k in range(f.d + 2)]
    if mode == "exhaustive":
        colors: Dict[Edge, int] = {}
        for comp in _components(edges):
            colors.update(_exhaustive_component(comp, sq))
    else:
        colors = _local_search(f, edges, sq, seed, restarts)
    chi = EdgeColoring(colors)
    value = talagrand_objective(f, chi)
    log.debug("min talagrand %s over %d edges: %.12g", mode, len(edges), value)
    return TalagrandResult(value, chi, mode == "exhaustive", mode)


# ---------------------------
# Monotone enumeration oracle
# ---------------------------

def _monotone_tables(d: int) -> List[Tuple[int, ...]]:
    # coordinate d is the top bit, so a table is (x_d = 0 half) + (x_d = 1 half)
    tables: List[Tuple[int, ...]] = [(0,), (1,)]
    for _ in range(d):
        tables = [
            lo + hi
            for lo in tables
            for hi in tables
            if all(a <= b for a, b in zip(lo, hi))
        ]
    return tables


def monotone_functions(d: int) -> Iterator[BooleanFunction]:
    check_dimension(d)
    if d > MONOTONE_ENUM_MAX_D:
        raise PreconditionError(f"monotone enumeration is limited to d <= {MONOTONE_ENUM_MAX_D}")
    for t in _monotone_tables(d):
        yield BooleanFunction(d, t)


def brute_force_distance(f: BooleanFunction) -> Fraction:
    """Fractional Hamming distance to the nearest monotone function, by enumeration."""
    best = min(sum(a != b for a, b in zip(f.table, g.table)) for g in monotone_functions(f.d))
    return Fraction(best, f.size)


# ---------------------------
# Full analysis
# ---------------------------

@dataclass(frozen=True)
class FunctionReport:
    function: BooleanFunction
    violated: int
    eps: Fraction
    influence: Fraction
    gamma_count: int
    gamma: Fraction
    min_talagrand: float
    talagrand_exact: bool

    @property
    def poincare_margin(self) -> Fraction:
        return self.influence - self.eps

    @property
    def margulis_ratio(self) -> Optional[Fraction]:
        if not self.eps:
            return None
        return self.influence * self.gamma / (self.eps * self.eps)

    @property
    def talagrand_ratio(self) -> Optional[float]:
        if not self.eps:
            return None
        return self.min_talagrand / float(self.eps)

    def to_json(self) -> Dict[str, Any]:
        def frac(q: Optional[Fraction]) -> Any:
            return None if q is None else fraction_to_json(q)
        tr = self.talagrand_ratio
        return {
            "kind": "function-report",
            "function": self.function.to_json(),
            "violated_edges": self.violated,
            "eps": frac(self.eps),
            "influence": frac(self.influence),
            "gamma_plus": frac(self.gamma),
            "gamma_plus_count": self.gamma_count,
            "min_talagrand": f"{self.min_talagrand:.12g}",
            "min_talagrand_exact": self.talagrand_exact,
            "margins": {
                "poincare": frac(self.poincare_margin),
                "margulis_ratio": frac(self.margulis_ratio),
                "talagrand_ratio": None if tr is None else f"{tr:.12g}",
            },
        }

    def rows(self) -> List[Tuple[str, str]]:
        mr = self.margulis_ratio
        tr = self.talagrand_ratio
        return [
            ("d", str(self.function.d)),
            ("violated edges", str(self.violated)),
            ("eps", str(self.eps)),
            ("I+", str(self.influence)),
            ("Gamma+", f"{self.gamma} ({self.gamma_count} edges)"),
            ("min Talagrand", f"{self.min_talagrand:.12g}" + ("" if self.talagrand_exact else " (upper bound)")),
            ("I+ - eps", str(self.poincare_margin)),
            ("I+ Gamma+ / eps^2", "-" if mr is None else str(mr)),
            ("minTal / eps", "-" if tr is None else f"{tr:.12g}"),
        ]

    def text_lines(self) -> List[str]:
        return [f"{k}: {v}" for k, v in self.rows()]

    def csv_rows(self) -> List[List[str]]:
        return [["quantity", "value"]] + [[k, v] for k, v in self.rows()]


def analyze(f: BooleanFunction, mode: str = "auto", seed: int = 0) -> FunctionReport:
    tal = min_talagrand(f, mode=mode, seed=seed)
    return FunctionReport(
        function=f,
        violated=len(violated_edges(f)),
        eps=distance_to_monotonicity(f),
        influence=directed_influence(f),
        gamma_count=gamma_plus_count(f),
        gamma=gamma_plus(f),
        min_talagrand=tal.value,
        talagrand_exact=tal.exact,
    )
