import pytest
from hypothesis import given, settings, strategies as st

from efxmulti.cuts import ORIENTED_2, Bundle, BundleTable, PairPartition, build_bundle_table
from efxmulti.errors import InvariantBreach, PreconditionError
from efxmulti.instance import BIPARTITE, BOUNDED, GIRTH6, build_instance, generate
from efxmulti.pipeline import step1_bipartite, step1_bounded, step1_girth
from efxmulti.state import (
    AllocationState, best_nonparallel, check_property, envy_report, is_efx, unpb,
)
from efxmulti.instance import detect_regimes
from efxmulti.valuation import additive_profile, make_additive, make_seeded_monotone


def singleton_table(inst):
    """One bundle per edge, bundle id = edge id."""
    bundles = {e.id: Bundle(e.id, e.pair, (e.id,)) for e in inst.edges}
    parts = {p: PairPartition(p, ORIENTED_2, ids) for p, ids in inst.pair_classes.items()}
    return BundleTable(bundles, parts)


def star():
    # centre 0; e0,e1 to 1; e2 (+ dummy 5) to 2; e3,e4 to 3
    inst = build_instance(4, [(0, 1), (0, 1), (0, 2), (0, 3), (0, 3)])
    prof = additive_profile(inst, {0: {0: 3, 1: 2, 2: 4, 3: 1, 4: 0},
                                   3: {3: 10, 4: 0}})
    return inst, prof, singleton_table(inst)


def test_empty_allocation_no_envy():
    inst, prof, tb = star()
    rep = envy_report(prof, inst, AllocationState(tb, inst.n))
    assert rep.envies == [] and rep.envied == ()


def test_envy_and_unique_envier():
    inst, prof, tb = star()
    X = AllocationState(tb, inst.n)
    X.assign(0, [3])
    X.assign(3, [4])
    rep = envy_report(prof, inst, X)
    assert (3, 0) in rep.envies
    assert rep.p(0) == 3
    with pytest.raises(PreconditionError, match="not unique"):
        rep.p(1)


def test_assign_conflict_is_breach():
    inst, prof, tb = star()
    X = AllocationState(tb, inst.n)
    X.assign(0, [3])
    with pytest.raises(InvariantBreach):
        X.assign(3, [3])


def test_unpb_envied_vertex():
    inst, prof, tb = star()
    X = AllocationState(tb, inst.n)
    X.assign(0, [3])
    X.assign(3, [4])
    best = unpb(prof, inst, X, tb, 0)
    # worth-3 edge to 1, worth-4 edge to 2, plus the zero-valued bundle released by the envier
    assert prof.value(0, best) == 7
    assert set(best) == {0, 2, 4}


def test_unpb_non_envied_keeps_holdings():
    inst = build_instance(3, [(0, 1), (0, 1), (0, 2), (0, 2)])
    prof = additive_profile(inst, {0: {0: 5, 1: 1, 2: 6, 3: 2}})
    tb = singleton_table(inst)
    X = AllocationState(tb, inst.n)
    X.assign(0, [0, 2])
    X.assign(1, [1])
    X.assign(2, [3])
    assert unpb(prof, inst, X, tb, 0) == (0, 2)


def test_best_nonparallel_cardinality_tie():
    inst = build_instance(3, [(0, 1), (0, 1), (0, 2), (0, 2)])
    prof = additive_profile(inst, {0: {0: 5, 1: 0, 2: 0, 3: 0}})
    tb = singleton_table(inst)
    assert best_nonparallel(prof, tb, 0, [0, 2]) == (0, 2)
    assert best_nonparallel(prof, tb, 0, [0, 1]) == (0,)


def test_is_efx_two_valuable_edges_violate():
    inst = build_instance(3, [(0, 1), (0, 1), (1, 2), (1, 2)])
    prof = additive_profile(inst, {0: {0: 2, 1: 5}})
    # vertex 0 holds nothing; vertex 1 holds two edges each worth more than that
    bad = is_efx(prof, inst, [0, 1 << 0 | 1 << 1, 0])
    assert (0, 1, 0) in bad and (0, 1, 1) in bad
    # holding the cheaper edge tolerates the other as a singleton
    assert is_efx(prof, inst, [1 << 0, 1 << 1, 0]) == []


def test_singleton_holdings_always_efx():
    inst = build_instance(3, [(0, 1), (1, 2), (0, 2)])
    prof = make_additive(inst, 1)
    masks = [1 << 0, 1 << 1, 1 << 2]
    assert is_efx(prof, inst, masks) == []


def test_p3_1_adversarial():
    inst = build_instance(3, [(0, 1), (0, 1), (1, 2), (1, 2)])
    prof = additive_profile(inst, {0: {0: 1, 1: 9}, 1: {0: 0, 1: 0, 2: 9, 3: 0}, 2: {2: 0, 3: 0}})
    tb = singleton_table(inst)
    X = AllocationState(tb, inst.n)
    X.assign(0, [0])
    X.assign(1, [1])   # 0 envies 1
    X.assign(2, [2])   # 1 envies 2
    res = check_property(prof, inst, X, tb, "P3_1")
    assert not res.ok and "1,2" in res.witness


def test_p2_universe_override():
    inst, prof, tb = star()
    X = AllocationState(tb, inst.n)
    assert not check_property(prof, inst, X, tb, "P2").ok
    assert check_property(prof, inst, X, tb, "P2", universe=lambda i: ()).ok


def test_unknown_property_and_missing_r():
    inst, prof, tb = star()
    X = AllocationState(tb, inst.n)
    with pytest.raises(PreconditionError):
        check_property(prof, inst, X, tb, "P9")
    with pytest.raises(PreconditionError):
        check_property(prof, inst, X, tb, "EQ1")


def _step1(family, inst, prof):
    tb = build_bundle_table(prof, inst, family)
    if family == BIPARTITE:
        return step1_bipartite(prof, inst, tb, detect_regimes(inst).coloring), tb
    if family == BOUNDED:
        return step1_bounded(prof, inst, tb)[0], tb
    X, final, _ = step1_girth(prof, inst, tb)
    return X, final


@pytest.mark.parametrize("family,prop", [(BIPARTITE, "P3_1"), (BOUNDED, "P3_2"), (GIRTH6, "P3_3")])
def test_step1_outputs_200_seeds(family, prop):
    for seed in range(200):
        n = 8 if family == BOUNDED else 3 + seed % 6
        inst = generate(family, n, mult=2 + seed % 2, max_edges=14, seed=seed)
        prof = make_seeded_monotone(inst, seed) if seed % 2 else make_additive(inst, seed)
        X, tb = _step1(family, inst, prof)
        rep = envy_report(prof, inst, X)
        for name in ("P1", "P2", prop):
            assert check_property(prof, inst, X, tb, name, rep=rep).ok, (seed, name)
        # an EFX orientation has exactly one envier per envied vertex
        for v in rep.envied:
            assert len(rep.enviers[v]) == 1


@settings(max_examples=100, deadline=None)
@given(seed=st.integers(0, 10**6))
def test_envy_report_matches_definition(seed):
    inst = generate(GIRTH6, 7, max_edges=12, seed=seed)
    prof = make_seeded_monotone(inst, seed)
    rng_masks = [(seed >> (3 * v)) & ((1 << inst.m) - 1) for v in range(inst.n)]
    # make the masks disjoint
    seen = 0
    masks = []
    for m in rng_masks:
        m &= ~seen
        seen |= m
        masks.append(m)
    rep = envy_report(prof, inst, masks)
    for i in range(inst.n):
        for j in range(inst.n):
            want = i != j and masks[j] != 0 and prof.value_mask(i, masks[j]) > prof.value_mask(i, masks[i])
            assert ((i, j) in rep.envies) == want
