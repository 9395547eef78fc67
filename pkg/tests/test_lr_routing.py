import pytest

from flow_core import FlowProblem, FlowSolution, make_cut, solve
from hypercube import layer, parse_vertex, path_edges
from kernel import INF, PreconditionError
from lr_routing import (
    DoubleLRSolution,
    GatewayContext,
    LRSolution,
    check_collections,
    check_double_lr_solution,
    check_lr_solution,
    cut_meets_terminals,
    double_lr_solution,
    gateway_profile,
    gateway_step_sets,
    gateways,
    lr_solution,
    pink_claims,
    pink_count,
    split_flow_collections,
    split_flow_two_collections,
)
from matched_pairs import MatchedPair, canonical_phi, enumerate_all_level_pairs


def pair(d, *phi):
    return MatchedPair.from_phi(d, [(parse_vertex(s, d), parse_vertex(t, d)) for s, t in phi])


def test_single_pair_through_the_square():
    sol = lr_solution(pair(2, ("00", "11")))
    assert len(sol) == 1
    path = sol.paths[0]
    assert path[0] == 0 and path[-1] == 3 and len(path) == 3
    assert sol.rendered()[0][0] == "00"


def test_two_disjoint_paths_in_the_3_cube():
    p = pair(3, ("001", "101"), ("010", "011"))
    sol = lr_solution(p)
    assert check_lr_solution(p, sol) is None
    assert len(sol) == 2


def test_full_layer_routing_in_the_4_cube():
    S, T = sorted(layer(4, 1)), sorted(layer(4, 3))
    p = MatchedPair.from_phi(4, canonical_phi(S, T))
    sol = lr_solution(p)
    assert len(sol) == 4
    assert check_lr_solution(p, sol) is None


def test_empty_pair_routes_to_nothing():
    assert lr_solution(MatchedPair.empty(3)).paths == ()


def test_non_level_sets_are_rejected():
    p = pair(3, ("000", "110"), ("100", "111"))
    with pytest.raises(PreconditionError, match="levels required"):
        lr_solution(p)


def test_invalid_pairs_are_rejected():
    with pytest.raises(PreconditionError, match="not a matched pair"):
        lr_solution(pair(2, ("01", "10")))


def test_checker_catches_shared_vertices():
    p = pair(3, ("100", "110"), ("010", "011"))
    bad = LRSolution(3, ((1, 3), (2, 3)))
    assert "shares vertex" in check_lr_solution(p, bad)
    assert "paths for" in check_lr_solution(p, LRSolution(3, ((1, 3),)))


def test_every_small_level_pair_routes():
    for p in enumerate_all_level_pairs(3, 3):
        assert check_lr_solution(p, lr_solution(p)) is None


@pytest.mark.slow
def test_every_level_pair_routes_in_the_4_cube():
    for p in enumerate_all_level_pairs(4, 6):
        assert check_lr_solution(p, lr_solution(p)) is None


def test_double_routing_uses_both_sides_of_the_square():
    p = pair(2, ("00", "11"))
    sol = double_lr_solution(p)
    assert check_double_lr_solution(p, sol) is None
    used = set(path_edges(sol.first.paths[0])) | set(path_edges(sol.second.paths[0]))
    assert len(used) == 4


def test_double_routing_in_the_3_cube():
    p = pair(3, ("000", "110"))
    sol = double_lr_solution(p)
    assert check_double_lr_solution(p, sol) is None
    assert len(sol.first) == len(sol.second) == 1


def test_double_routing_two_pairs_in_the_4_cube():
    p = pair(4, ("0001", "0111"), ("0010", "1011"))
    sol = double_lr_solution(p)
    assert check_double_lr_solution(p, sol) is None
    assert set(sol.to_json()) == {"first", "second"}


def test_double_routing_needs_distance_two():
    with pytest.raises(PreconditionError, match="distance ≥ 2 required"):
        double_lr_solution(pair(2, ("00", "10")))


def test_every_small_level_pair_routes_twice():
    for p in enumerate_all_level_pairs(3, 3, min_gap=2):
        assert check_double_lr_solution(p, double_lr_solution(p)) is None


@pytest.mark.slow
def test_every_level_pair_routes_twice_in_the_4_cube():
    for p in enumerate_all_level_pairs(4, 6, min_gap=2):
        assert check_double_lr_solution(p, double_lr_solution(p)) is None


def test_collections_checker_catches_a_reused_edge():
    p = pair(2, ("00", "11"))
    same = ((0, 1, 3),)
    assert "used twice" in check_collections(p, [same, same])
    assert check_double_lr_solution(p, DoubleLRSolution(LRSolution(2, same), LRSolution(2, same)))


def test_split_unit_flow_into_two_collections():
    problem = FlowProblem.on_cover(3, [0], [7], vcap=2, ecap=1)
    sol, _ = solve(problem)
    assert sol.value == 2
    first, second = split_flow_two_collections(problem, sol)
    assert first.value + second.value == 2
    for part in (first, second):
        assert all(n <= 1 for n in part.vertex_load().values())
    assert not set(first.edge_load()) & set(second.edge_load())


def test_split_into_three_collections():
    problem = FlowProblem.on_cover(3, [0], [7], vcap=3, ecap=1)
    sol, _ = solve(problem)
    parts = split_flow_collections(problem, sol, 3)
    assert [part.value for part in parts] == [1, 1, 1]


def test_split_rejects_overloaded_vertices():
    problem = FlowProblem.on_cover(3, [0], [7], vcap=3, ecap=1)
    sol, _ = solve(problem)
    with pytest.raises(PreconditionError, match="throughput"):
        split_flow_collections(problem, sol, 2)


# ---------------------------
# Gateways and pink edges
# ---------------------------

def test_gateways_of_an_empty_flow():
    problem = FlowProblem.on_cover(2, [0], [3], vcap=1, ecap=INF)
    ctx = GatewayContext.build(problem, FlowSolution.empty(2), make_cut(problem, [], []), strict=False)
    assert gateways(ctx, 0) == {0}


def test_no_gateways_when_every_vertex_carries_two_paths():
    problem = FlowProblem.on_cover(2, [0], [3], vcap=2, ecap=1)
    ctx = GatewayContext.build(problem)
    assert ctx.cut.C == {0}
    assert gateways(ctx, 0) == frozenset()
    assert set(gateway_profile(ctx)) == {0, 1}


def test_cut_meets_terminals():
    problem = FlowProblem.on_cover(2, [0], [3], vcap=1, ecap=INF)
    assert cut_meets_terminals(GatewayContext.build(problem)) == {0}


def _one_path_context(d, path):
    problem = FlowProblem.on_cover(d, [path[0]], [path[-1]], vcap=1, ecap=INF)
    sol = FlowSolution(1, {}, (tuple(path),), d)
    return GatewayContext.build(problem, sol, make_cut(problem, [path[0]], []))


def test_pink_count_on_one_path():
    ctx = _one_path_context(2, [0, 2, 3])
    assert pink_count(ctx, 1, [parse_vertex("01")]) == 1
    assert pink_count(ctx, 2, [parse_vertex("01")]) == 1
    assert pink_count(ctx, 1, [parse_vertex("10")]) == 0


def test_pink_count_without_paths():
    problem = FlowProblem.on_cover(2, [0], [3], vcap=1, ecap=INF)
    ctx = GatewayContext.build(problem, FlowSolution.empty(2), make_cut(problem, [], []), strict=False)
    assert pink_count(ctx, 1, range(4)) == 0


def test_step_sets_without_paths():
    problem = FlowProblem.on_cover(2, [0], [3], vcap=1, ecap=INF)
    ctx = GatewayContext.build(problem, FlowSolution.empty(2), make_cut(problem, [], []), strict=False)
    steps = gateway_step_sets(ctx, 0, 1)
    assert (steps.A, steps.X, steps.B, steps.Y) == ({0}, {1}, frozenset(), frozenset())


def test_step_sets_follow_the_path():
    problem = FlowProblem.on_cover(3, [0], [7], vcap=1, ecap=INF)
    sol = FlowSolution(1, {}, ((0, 1, 3, 7),), 3)
    ctx = GatewayContext.build(problem, sol, make_cut(problem, [], []), strict=False)
    steps = gateway_step_sets(ctx, 0, 1)
    assert steps.A == {0} and steps.X == {1}
    assert steps.B == {3} and steps.Y == {2}
    claims = pink_claims(ctx, steps)
    assert claims.counts == {"A": 0, "X": 1, "B": 1, "Y": 0}
    assert claims.a_equals_y and claims.x_equals_b


def test_step_set_sizes_pair_up():
    for p in enumerate_all_level_pairs(3, 3):
        problem = FlowProblem.on_cover(3, p.S, p.T, vcap=1, ecap=INF)
        ctx = GatewayContext.build(problem)
        for v in ctx.partition.s_side:
            for r in range(1, 4):
                if (v >> (r - 1)) & 1:
                    continue
                steps = gateway_step_sets(ctx, v, r)
                assert len(steps.X) == len(steps.A)
                assert len(steps.Y) == len(steps.B)


def test_step_sets_need_coordinate_off():
    problem = FlowProblem.on_cover(2, [0], [3], vcap=1, ecap=INF)
    ctx = GatewayContext.build(problem, FlowSolution.empty(2), make_cut(problem, [], []), strict=False)
    with pytest.raises(PreconditionError):
        gateway_step_sets(ctx, 1, 1)
