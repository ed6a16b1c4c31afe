import itertools
import math

import pytest
from hypothesis import given, settings, strategies as st

from efxmulti.errors import FormatError, InstanceError
from efxmulti.instance import (
    BIPARTITE, BOUNDED, GIRTH6, REGIMES, build_instance, detect_regimes, format_instance,
    generate, neighbor_bound, parse_instance, simple_girth, two_coloring,
)


def test_single_edge_gets_dummy():
    inst = build_instance(2, [(0, 1)])
    assert inst.pair_classes == {(0, 1): (0, 1)}
    assert inst.edge(1).is_dummy and not inst.edge(0).is_dummy
    assert inst.m == 1
    assert inst.degree_one == (0, 1)


def test_two_classes_no_dummies():
    inst = build_instance(3, [(0, 1), (0, 1), (1, 2), (1, 2)])
    assert inst.pair_classes == {(0, 1): (0, 1), (1, 2): (2, 3)}
    assert inst.dummy_mask == 0


def test_self_loop_rejected_with_index():
    with pytest.raises(InstanceError, match="edge 0 is a self-loop"):
        build_instance(2, [(0, 0)])


def test_out_of_range_rejected():
    with pytest.raises(InstanceError, match="edge 1 endpoint 5"):
        build_instance(3, [(0, 1), (1, 5)])


def test_regimes_single_pair():
    rep = detect_regimes(build_instance(2, [(0, 1)] * 3))
    assert rep.is_bipartite
    assert rep.simple_girth == math.inf and rep.girth_ok
    assert rep.neighbor_bound == 0 and rep.max_neighbors == 1 and not rep.neighbor_bound_ok


def test_regimes_triangle():
    rep = detect_regimes(build_instance(3, [(0, 1), (0, 1), (1, 2), (1, 2), (0, 2), (0, 2)]))
    assert not rep.is_bipartite
    assert rep.simple_girth == 3 and not rep.girth_ok
    assert rep.applicable_regimes == ()


def test_regimes_six_cycle():
    raw = [(k, (k + 1) % 6) for k in range(6) for _ in range(3)]
    rep = detect_regimes(build_instance(6, raw))
    assert rep.is_bipartite and rep.simple_girth == 6 and rep.girth_ok


def test_neighbor_bound_rules():
    assert neighbor_bound(8, 3) == 1
    assert neighbor_bound(8, 2) == 2
    assert neighbor_bound(3, 3) == 0
    assert neighbor_bound(12, 1) == 3


def test_generate_examples():
    assert detect_regimes(generate(BIPARTITE, 4, mult=3, seed=7)).is_bipartite
    g = generate(GIRTH6, 6, mult=2, density=0.0, seed=1)
    assert detect_regimes(g).simple_girth == 6
    b = generate(BOUNDED, 8, mult=3, neighbors=1, seed=3)
    assert detect_regimes(b).max_neighbors <= 1


def test_generate_rejects_infeasible_bound():
    with pytest.raises(InstanceError, match="bound"):
        generate(BOUNDED, 3, neighbors=2)


def test_generate_deterministic():
    for fam in REGIMES:
        assert generate(fam, 7, seed=5) == generate(fam, 7, seed=5)


@pytest.mark.parametrize("family", REGIMES)
def test_generate_families_1000_seeds(family):
    for seed in range(1000):
        inst = generate(family, 3 + seed % 6, mult=1 + seed % 3, max_edges=14, seed=seed)
        assert family in detect_regimes(inst).applicable_regimes
        assert inst.m <= 14
        assert inst.max_real_multiplicity() <= 1 + seed % 3


def _brute_girth(n, pairs):
    adj = {frozenset(p) for p in pairs}
    for length in range(3, n + 1):
        for cyc in itertools.permutations(range(n), length):
            if cyc[0] != min(cyc) or cyc[1] > cyc[-1]:
                continue
            if all(frozenset((cyc[k], cyc[(k + 1) % length])) in adj for k in range(length)):
                return length
    return math.inf


def _brute_bipartite(n, pairs):
    return any(all(bits >> a & 1 != bits >> b & 1 for a, b in pairs) for bits in range(1 << n))


@settings(max_examples=300, deadline=None)
@given(n=st.integers(1, 7), data=st.data())
def test_girth_and_coloring_match_brute_force(n, data):
    all_pairs = [(a, b) for a in range(n) for b in range(a + 1, n)]
    pairs = data.draw(st.lists(st.sampled_from(all_pairs), unique=True) if all_pairs else st.just([]))
    inst = build_instance(n, pairs)
    assert simple_girth(n, inst.neighbors) == _brute_girth(n, pairs)
    col = two_coloring(n, inst.neighbors)
    assert (col is not None) == _brute_bipartite(n, pairs)
    if col is not None:
        assert all(col[a] != col[b] for a, b in pairs)


@settings(max_examples=200, deadline=None)
@given(n=st.integers(1, 6), data=st.data())
def test_format_round_trip(n, data):
    raw = data.draw(st.lists(st.tuples(st.integers(0, n - 1), st.integers(0, n - 1))
                             .filter(lambda p: p[0] != p[1]), max_size=10))
    inst = build_instance(n, raw)
    back = parse_instance(format_instance(inst))
    assert back == inst
    assert format_instance(back) == format_instance(inst)


def test_parse_errors_carry_line_numbers():
    with pytest.raises(FormatError, match="line 1"):
        parse_instance("bogus\n")
    with pytest.raises(FormatError, match="line 3"):
        parse_instance("efx-instance v1\nn 3\nedge 0 x\n")
    with pytest.raises((FormatError, InstanceError)):
        parse_instance("efx-instance v1\nn 3\nedge 1 1\n")
