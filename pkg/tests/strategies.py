from __future__ import annotations

from hypothesis import strategies as st

from hypercube import full_cube
from flow_core import FlowProblem
from monotonicity import BooleanFunction
from kernel import INF

CAPS = st.sampled_from([1, 2, 3, INF])


@st.composite
def flow_problems(draw, min_d: int = 2, max_d: int = 4, max_terminals: int = 4) -> FlowProblem:
    """Whole-cube networks with mixed capacities; sources stay finite so the flow is bounded."""
    d = draw(st.integers(min_d, max_d))
    n = 1 << d
    G = full_cube(d)
    S = draw(st.sets(st.integers(0, n - 1), min_size=1, max_size=max_terminals))
    T = draw(st.sets(st.integers(0, n - 1), min_size=1, max_size=max_terminals))
    vcap = {v: draw(CAPS) for v in range(n)}
    for s in S:
        vcap[s] = draw(st.integers(1, 3))
    ecap = {e: draw(CAPS) for e in sorted(G.edges)}
    return FlowProblem(G, frozenset(S), frozenset(T), vcap, ecap)


@st.composite
def subsets(draw, d: int):
    """Proper nonempty subsets of the d-cube as sorted tuples."""
    n = 1 << d
    mask = draw(st.integers(1, (1 << n) - 2))
    return tuple(x for x in range(n) if (mask >> x) & 1)


@st.composite
def functions(draw, min_d: int = 2, max_d: int = 4) -> BooleanFunction:
    d = draw(st.integers(min_d, max_d))
    return BooleanFunction.from_int(draw(st.integers(0, (1 << (1 << d)) - 1)), d)
