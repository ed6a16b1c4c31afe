import itertools
import math

import pytest
from hypothesis import given, settings, strategies as st

from conftest import family_instance, valuation_for
from efxmulti.cuts import ORIENTED_2, build_bundle_table
from efxmulti.errors import NoApplicableRegime
from efxmulti.instance import BIPARTITE, BOUNDED, GIRTH6, build_instance, detect_regimes, generate
from efxmulti.pipeline import (
    HGraph, _GirthStep, build_H, matching_weight, max_weight_A_perfect_matching, solve, step1_bipartite,
    step1_bounded, step1_girth, step2_reduce_envy, step3_finalize,
)
from efxmulti.state import AllocationState, envy_report, is_efx
from efxmulti.valuation import additive_profile, make_additive


def _brute_matching_weight(H):
    vs = sorted(H.top)
    best = None
    for pick in itertools.product((0, 1), repeat=len(vs)):
        chosen = [H.top[v][k] for v, k in zip(vs, pick)]
        if len(set(chosen)) == len(chosen):
            w = sum(1 for k in pick if k == 0)
            best = w if best is None else max(best, w)
    return best


def test_shared_top_bundle():
    H = HGraph({0: (10, 11), 1: (10, 12)})
    m = max_weight_A_perfect_matching(H)
    assert matching_weight(H, m) == 1
    assert m == {0: 10, 1: 12}


def test_distinct_tops():
    H = HGraph({v: (10 + v, 20 + v) for v in range(5)})
    assert matching_weight(H, max_weight_A_perfect_matching(H)) == 5


def test_four_cycle_matches_brute_force():
    H = HGraph({0: (10, 11), 1: (12, 11), 2: (12, 13), 3: (10, 13)})
    m = max_weight_A_perfect_matching(H)
    assert len(set(m.values())) == 4
    assert matching_weight(H, m) == _brute_matching_weight(H) == 2


@settings(max_examples=120, deadline=None)
@given(seed=st.integers(0, 10**6), kind=st.sampled_from(["additive", "monotone"]))
def test_matching_is_optimal_on_bounded_tables(seed, kind):
    inst = family_instance(BOUNDED, seed)
    prof = valuation_for(inst, kind, seed)
    H = build_H(prof, inst, build_bundle_table(prof, inst, BOUNDED))
    m = max_weight_A_perfect_matching(H)
    assert set(m) == set(H.top) and len(set(m.values())) == len(m)
    assert matching_weight(H, m) == _brute_matching_weight(H)
    assert matching_weight(H, m) >= math.ceil(len(H.top) / 2)


def test_step1_bounded_choices():
    for seed in range(200):
        inst = family_instance(BOUNDED, seed)
        prof = valuation_for(inst, "monotone", seed)
        tb = build_bundle_table(prof, inst, BOUNDED)
        X, H, match, _w = step1_bounded(prof, inst, tb)
        assert len(envy_report(prof, inst, X).envied) <= inst.n // 2
        for v, (first, second) in H.top.items():
            assert X.holdings[v] in ((first,), (second,))
            if X.holdings[v] == (second,):
                assert X.owner(first) not in (None, v)


def test_step1_bipartite_two_edges():
    inst = build_instance(2, [(0, 1), (0, 1)])
    prof = additive_profile(inst, {0: {0: 5, 1: 3}, 1: {0: 3, 1: 5}})
    rep = detect_regimes(inst)
    X = step1_bipartite(prof, inst, build_bundle_table(prof, inst, BIPARTITE), rep.coloring)
    assert X.holdings == [(0,), (1,)]
    assert envy_report(prof, inst, X).envied == ()


def test_zero_valuations_no_envy():
    inst = generate(BIPARTITE, 6, seed=3)
    prof = make_additive(inst, 0, scale=0)
    sol = solve(prof, inst)
    assert sol.stats["envied_after_step1"] == 0


def test_repair_round_lowers_envy():
    rounds = 0
    for seed in range(300):
        inst = family_instance(GIRTH6, seed)
        prof = valuation_for(inst, ("additive", "monotone")[seed % 2], seed)
        g = _GirthStep(prof, inst, build_bundle_table(prof, inst, GIRTH6))
        g.offer_loop()
        before = len(envy_report(prof, inst, g.X).envied)
        g.repair_loop()
        if g.repairs:
            rounds += 1
            assert len(envy_report(prof, inst, g.X).envied) < before
    assert rounds > 0


def test_girth_final_table_one_cut_per_pair():
    repaired = 0
    for seed in range(300):
        inst = family_instance(GIRTH6, seed)
        prof = valuation_for(inst, ("additive", "monotone")[seed % 2], seed)
        X, final, info = step1_girth(prof, inst, build_bundle_table(prof, inst, GIRTH6))
        repaired += bool(info["repairs"])
        final.validate(inst)
        for p, part in final.partitions.items():
            assert part.kind == ORIENTED_2 and len(part.bundles) == 2
    assert repaired > 0, "no seed exercised the repair loop"


def test_step2_fixed_point_and_idempotence():
    for seed in range(60):
        inst = family_instance(BIPARTITE, seed)
        prof = valuation_for(inst, "additive", seed)
        tb = build_bundle_table(prof, inst, BIPARTITE)
        X1 = step1_bipartite(prof, inst, tb, detect_regimes(inst).coloring)
        X2, _ = step2_reduce_envy(prof, inst, X1, tb)
        X3, stats = step2_reduce_envy(prof, inst, X2, tb)
        assert X3.holdings == X2.holdings
        assert stats["step2_rounds"] == 0 and stats["step2_moves"] == 0


def test_step3_nothing_to_park():
    inst = build_instance(2, [(0, 1), (0, 1)])
    prof = additive_profile(inst, {0: {0: 1, 1: 1}, 1: {0: 1, 1: 1}})
    tb = build_bundle_table(prof, inst, BIPARTITE)
    X = step1_bipartite(prof, inst, tb, detect_regimes(inst).coloring)
    X3, parks = step3_finalize(prof, inst, X, BIPARTITE)
    assert parks == [] and X3.holdings == X.holdings


def test_triangle_has_no_regime():
    inst = build_instance(3, [(0, 1), (0, 1), (1, 2), (1, 2), (0, 2), (0, 2)])
    with pytest.raises(NoApplicableRegime) as exc:
        solve(make_additive(inst, 0), inst)
    assert "not bipartite" in str(exc.value) and "girth" in str(exc.value)


def test_forced_regime_must_apply():
    inst = build_instance(4, [(0, 1), (1, 2), (2, 3), (3, 0)])
    with pytest.raises(NoApplicableRegime):
        solve(make_additive(inst, 0), inst, regime=GIRTH6)


def test_priority_bipartite_over_girth():
    raw = [(k, (k + 1) % 6) for k in range(6) for _ in range(2)]
    inst = build_instance(6, raw)
    sol = solve(make_additive(inst, 1), inst)
    assert sol.regime == BIPARTITE and sol.trace.regime == BIPARTITE


def test_priority_girth_over_bounded():
    # a 5-cycle of girth 5 is neither; a tree on 8 vertices with max degree 1 is all three
    inst = build_instance(8, [(0, 1), (2, 3), (4, 5), (6, 7)])
    assert solve(make_additive(inst, 0), inst).regime == BIPARTITE
    odd = build_instance(9, [(0, 1), (1, 2), (2, 3), (3, 4), (4, 5), (5, 6), (6, 0)])
    rep = detect_regimes(odd)
    assert not rep.is_bipartite and rep.girth_ok
    assert solve(make_additive(odd, 0), odd).regime == GIRTH6


def test_girth_parking_distinct_when_two_bundles_left():
    found = 0
    for seed in range(400):
        inst = family_instance(GIRTH6, seed)
        prof = valuation_for(inst, ("additive", "monotone")[seed % 2], seed)
        sol = solve(prof, inst, regime=GIRTH6)
        st2, st3 = sol.trace.stage("step2"), sol.trace.stage("step3")
        un = set(st2.unallocated())
        parks = {bid: k for bid, k, _ in st3.parks}
        X = AllocationState(st2.table, inst.n)
        for v in range(inst.n):
            X.assign(v, st2.holdings[v])
        envied = set(envy_report(prof, inst, X).envied)
        for p, part in st2.table.partitions.items():
            left = [b for b in part.bundles if b in un]
            if len(left) == 2 and set(p) <= envied:
                found += 1
                assert parks[left[0]] != parks[left[1]]
    assert found > 0


@settings(max_examples=80, deadline=None)
@given(seed=st.integers(0, 10**6), family=st.sampled_from([BIPARTITE, BOUNDED, GIRTH6]),
       kind=st.sampled_from(["additive", "monotone"]))
def test_solve_is_complete_and_efx(seed, family, kind):
    inst = family_instance(family, seed)
    prof = valuation_for(inst, kind, seed)
    sol = solve(prof, inst, regime=family)
    got = sorted(e for part in sol.allocation for e in part)
    assert got == list(inst.real_edges)
    masks = [sum(1 << e for e in part) for part in sol.allocation]
    assert is_efx(prof, inst, masks) == []
    assert sol.stats["fallback_parks"] == 0
