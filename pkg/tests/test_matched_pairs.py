from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hypercube import layer, parse_set, parse_vertex
from kernel import NoCertificate, PreconditionError
from matched_pairs import (
    MatchedPair,
    canonical_phi,
    directed_volume,
    enumerate_all_level_pairs,
    enumerate_level_matched_pairs,
    max_comparability_matching,
    minimality_reduction,
    require_valid,
    separation_distance,
    separation_distance_of_set,
    validate_matched_pair,
)
from oracles import brute_force_matching, count_perfect_level_pairs


def pair(d, *phi):
    return MatchedPair.from_phi(d, [(parse_vertex(s, d), parse_vertex(t, d)) for s, t in phi])


def test_valid_pair():
    ok, why = validate_matched_pair(pair(2, ("00", "11")))
    assert ok and why is None


def test_incomparable_pair_is_rejected():
    ok, why = validate_matched_pair(pair(2, ("01", "10")))
    assert not ok
    assert "not strictly below" in why
    with pytest.raises(PreconditionError, match="not a matched pair"):
        require_valid(pair(2, ("01", "10")))


def test_equal_endpoints_are_rejected():
    ok, _ = validate_matched_pair(pair(2, ("01", "01")))
    assert not ok


def test_duplicate_target_is_rejected():
    p = MatchedPair(2, frozenset({0, 1}), frozenset({3}), ((0, 3), (1, 3)))
    ok, why = validate_matched_pair(p)
    assert not ok and "duplicate target" in why


def test_json_roundtrip_keeps_pair():
    p = pair(3, ("100", "110"), ("010", "011"))
    assert MatchedPair.from_json(p.to_json()) == p


def test_from_json_without_sets_uses_phi():
    p = MatchedPair.from_json({"d": 2, "phi": [["00", "11"]]})
    assert p.S == {0} and p.T == {3}


def test_from_json_rejects_garbage():
    with pytest.raises(PreconditionError):
        MatchedPair.from_json({"phi": []})


def test_directed_volume_examples():
    assert directed_volume(2, [0])[0] == 1
    assert directed_volume(2, [3])[0] == 0
    vol, cert = directed_volume(2, parse_set(["00", "01"], 2))
    assert vol == 2
    assert validate_matched_pair(cert.pair)[0]
    assert cert.pair.S == parse_set(["00", "01"], 2)


def test_directed_volume_of_empty_set_is_zero():
    assert directed_volume(3, [])[0] == 0
    assert directed_volume(2, range(4))[0] == 0


@settings(max_examples=60)
@given(st.integers(2, 3).flatmap(lambda d: st.tuples(st.just(d), st.sets(st.integers(0, (1 << d) - 1)))))
def test_directed_volume_matches_bitmask_oracle(dS):
    d, S = dS
    T = sorted(set(range(1 << d)) - S)
    assert directed_volume(d, S)[0] == brute_force_matching(sorted(S), T)


def test_separation_distance_examples():
    assert separation_distance(pair(2, ("00", "11"))) == 2
    assert separation_distance(pair(2, ("00", "01"), ("01", "11"))) == 1
    assert separation_distance(pair(3, ("000", "011"), ("001", "111"))) == 2
    with pytest.raises(PreconditionError):
        separation_distance(MatchedPair.empty(2))


def test_separation_distance_of_set():
    r, cert = separation_distance_of_set(3, [0])
    assert r == 1
    assert cert.value == 1
    r, _ = separation_distance_of_set(2, parse_set(["00", "01"], 2))
    assert r == 1


def test_separation_distance_of_set_prefers_short_gaps():
    # 000 takes a weight-1 vertex and 110 takes 111
    r, cert = separation_distance_of_set(3, parse_set(["000", "110"], 3))
    assert cert.value == directed_volume(3, parse_set(["000", "110"], 3))[0]
    assert r == Fraction(1)


def test_separation_distance_of_set_without_certificate():
    with pytest.raises(NoCertificate):
        separation_distance_of_set(2, [3])


def test_minimality_reduction():
    p = pair(3, ("100", "110"), ("010", "011"))
    q = minimality_reduction(p, [parse_vertex("110", 3)])
    assert q == pair(3, ("010", "011"))


def test_canonical_phi_is_lexicographically_smallest():
    S = sorted(layer(3, 1))
    T = sorted(layer(3, 2))
    phi = canonical_phi(S, T)
    assert phi is not None
    assert [s for s, _ in phi] == S
    assert validate_matched_pair(MatchedPair.from_phi(3, phi))[0]
    assert phi[0] == (S[0], min(t for t in T if S[0] & t == S[0]))


def test_canonical_phi_none_without_perfect_matching():
    # 1001 and 1010 both sit above 1000 only
    assert canonical_phi([1, 2], [5, 9]) is None
    assert len(max_comparability_matching([1, 2], [5, 9])) == 1


def test_enumeration_examples():
    assert len(list(enumerate_level_matched_pairs(2, 0, 2, 1))) == 1
    assert len(list(enumerate_level_matched_pairs(3, 0, 1, 1))) == 3


@pytest.mark.parametrize("i,j", [(0, 1), (1, 2), (1, 3), (0, 3), (2, 3)])
def test_enumeration_matches_bitmask_oracle(i, j):
    pairs = list(enumerate_level_matched_pairs(3, i, j, 3))
    assert len(pairs) == count_perfect_level_pairs(3, layer(3, i), layer(3, j), 3)
    assert len({(p.S, p.T) for p in pairs}) == len(pairs)
    assert all(validate_matched_pair(p)[0] for p in pairs)


def test_enumerate_all_respects_gap():
    for p in enumerate_all_level_pairs(3, 2, min_gap=2):
        assert all(bin(t).count("1") - bin(s).count("1") >= 2 for s, t in p.phi)
