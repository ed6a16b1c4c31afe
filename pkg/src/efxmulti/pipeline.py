"""Three-step construction of a complete EFX allocation.

Step 1 builds a regime-specific partial orientation, step 2 reduces envy,
step 3 parks every leftover bundle on a safe non-endpoint vertex. Every
stage is checked against its required properties; a failed check raises
``InvariantBreach`` carrying the trace so far.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from efxmulti.cuts import BundleTable, build_bundle_table
from efxmulti.errors import InvariantBreach, NoApplicableRegime, PreconditionError
from efxmulti.instance import (
    BIPARTITE, BOUNDED, GIRTH6, REGIME_PRIORITY, MultigraphInstance, RegimeReport, detect_regimes,
)
from efxmulti.state import (
    AllocationState, PropertyResult, check_property, envy_report, is_efx, unpb,
)
from efxmulti.trace import PipelineTrace, StageSnapshot
from efxmulti.valuation import ValuationProfile

R_BOUND = {BIPARTITE: 2, GIRTH6: 2, BOUNDED: 3}
STEP1_PROPS = {BIPARTITE: "P3_1", BOUNDED: "P3_2", GIRTH6: "P3_3"}

LOOP_CAP = 200_000

NOTE_OFFER = "offer-guard tests the pair's common auxiliary availability"
NOTE_INNER = "inner-offer reads UB_j for the receiving vertex j"


def _argmax_bundle(profile, table, v, bids):
    """Most valued bundle for v among ``bids``; lowest id on ties."""
    best, best_v = None, None
    for b in sorted(bids):
        val = profile.value_mask(v, table.mask(b))
        if best_v is None or val > best_v:
            best, best_v = b, val
    return best, best_v


def _held_value(profile, X, v):
    return profile.value_mask(v, X.mask(v))


# --------------------------------------------------------------------------
# step 1: bipartite


def step1_bipartite(profile: ValuationProfile, inst: MultigraphInstance, table: BundleTable,
                    coloring) -> AllocationState:
    """Side A (color 0) picks first, then side B, each its best available bundle."""
    X = AllocationState(table, inst.n)
    for side in (0, 1):
        for v in range(inst.n):
            if coloring[v] != side:
                continue
            b, _ = _argmax_bundle(profile, table, v, X.ub(v))
            if b is not None:
                X.assign(v, [b])
    return X


# --------------------------------------------------------------------------
# step 1: bounded neighbors via H(G)


@dataclass
class HGraph:
    """Vertex side = instance vertices with bundles; each links to its top two
    bundles (weights 1 and 0)."""

    top: dict[int, tuple[int, int]]

    def edges(self):
        for v, (b1, b2) in sorted(self.top.items()):
            yield v, b1, 1
            yield v, b2, 0

    def components(self):
        """Connected components as (vertex list, is_cycle, ordered walk)."""
        b_adj: dict[int, list[int]] = {}
        for v, (b1, b2) in self.top.items():
            b_adj.setdefault(b1, []).append(v)
            b_adj.setdefault(b2, []).append(v)
        for b, vs in b_adj.items():
            if len(vs) > 2:
                raise InvariantBreach(f"bundle {b} has degree {len(vs)} in H(G)")
        seen: set[int] = set()
        comps = []
        for start in sorted(self.top):
            if start in seen:
                continue
            stack, comp, bs = [start], [], set()
            seen.add(start)
            while stack:
                v = stack.pop()
                comp.append(v)
                for b in self.top[v]:
                    bs.add(b)
                    for u in b_adj[b]:
                        if u not in seen:
                            seen.add(u)
                            stack.append(u)
            ends = [b for b in bs if len(b_adj[b]) == 1]
            comps.append((sorted(comp), self._walk(comp, ends, b_adj)))
        return comps

    def _walk(self, comp, ends, b_adj):
        """Order a component as B0 v1 B1 v2 ... ; returns (vertices, left, right, cycle)."""
        cycle = not ends
        if cycle:
            v = min(comp)
            cur_b = self.top[v][0]
        else:
            cur_b = min(ends)
            v = b_adj[cur_b][0]
        order, left, right = [], [], []
        while v is not None and v not in order:
            b1, b2 = self.top[v]
            other = b2 if b1 == cur_b else b1
            order.append(v)
            left.append(cur_b)
            right.append(other)
            nxt = [u for u in b_adj[other] if u != v]
            cur_b = other
            v = nxt[0] if nxt else None
        if sorted(order) != sorted(comp):
            raise InvariantBreach("H(G) component is neither a path nor a cycle")
        return order, left, right, cycle


def build_H(profile: ValuationProfile, inst: MultigraphInstance, table: BundleTable) -> HGraph:
    top = {}
    for v in range(inst.n):
        fam = table.family(v)
        if not fam:
            continue
        if len(fam) < 2:
            raise InvariantBreach(f"vertex {v} has fewer than two bundles")
        ranked = sorted(fam, key=lambda b: (-profile.value_mask(v, table.mask(b)), b))
        top[v] = (ranked[0], ranked[1])
    return HGraph(top)


def max_weight_A_perfect_matching(H: HGraph) -> dict[int, int]:
    """Maximum-weight matching covering every vertex node.

    Each component is a path B0 v1 B1 ... vk Bk (a prefix takes left
    bundles, the suffix right ones) or a cycle (all left or all right).
    Ties prefer lower-id vertices receiving their top bundle.
    """
    match: dict[int, int] = {}
    for comp, (order, left, right, cycle) in H.components():
        k = len(order)
        options = []
        if cycle:
            options = [list(left), list(right)]
        else:
            options = [left[:t] + right[t:] for t in range(k + 1)]
        best, best_key = None, None
        for opt in options:
            if len(set(opt)) != k:
                raise InvariantBreach("H(G) option reuses a bundle")
            w = {v: int(opt[idx] == H.top[v][0]) for idx, v in enumerate(order)}
            key = (sum(w.values()), tuple(w[v] for v in sorted(order)))
            if best_key is None or key > best_key:
                best, best_key = opt, key
        if best is None:
            raise InvariantBreach("no A-perfect matching in an H(G) component")
        for idx, v in enumerate(order):
            match[v] = best[idx]
    return match


def matching_weight(H: HGraph, match: dict[int, int]) -> int:
    return sum(1 for v, b in match.items() if H.top[v][0] == b)


def step1_bounded(profile: ValuationProfile, inst: MultigraphInstance, table: BundleTable):
    H = build_H(profile, inst, table)
    match = max_weight_A_perfect_matching(H)
    if set(match) != set(H.top) or len(set(match.values())) != len(match):
        raise InvariantBreach("matching is not A-perfect")
    weight = matching_weight(H, match)
    if weight < math.ceil(len(H.top) / 2):
        raise InvariantBreach(f"matching weight {weight} below ceil({len(H.top)}/2)")
    X = AllocationState(table, inst.n)
    for v, b in sorted(match.items()):
        X.assign(v, [b])
    return X, H, match, weight


# --------------------------------------------------------------------------
# step 1: girth at least six


class _GirthStep:
    def __init__(self, profile, inst, table):
        self.profile, self.inst, self.table = profile, inst, table
        self.X = AllocationState(table, inst.n)
        self.aux = [set() for _ in range(inst.n)]
        for p, part in table.partitions.items():
            for v in p:
                self.aux[v].update(part.bundles)
        self.offers = 0
        self.repairs = []

    def common(self, p):
        return self.aux[p[0]] & self.aux[p[1]] & set(self.table.partitions[p].bundles)

    def available(self, p):
        common = self.common(p)
        held = [b for b in common if self.X.owner(b) is not None]
        if not held:
            return common
        if len(held) == 1:
            for x, y in self.table.cuts[p].values():
                if held[0] in (x, y):
                    other = y if held[0] == x else x
                    return {other} & common
        return set()

    def val(self, v, b):
        return self.profile.value_mask(v, self.table.mask(b))

    def offer_loop(self):
        pv = self.profile.value_mask
        while True:
            hit = None
            for i in range(self.inst.n):
                vi = pv(i, self.X.mask(i))
                for j in self.inst.neighbors(i):
                    p = (min(i, j), max(i, j))
                    avail = self.available(p)
                    c, r = self.table.cuts[p][j]
                    vj = pv(j, self.X.mask(j))
                    for s in (c, r):
                        if s in avail and (self.val(i, s) > vi or self.val(j, s) > vj):
                            hit = (i, j, s, c, avail, vi)
                            break
                    if hit:
                        break
                if hit:
                    break
            if hit is None:
                return
            self.offers += 1
            if self.offers > LOOP_CAP:
                raise InvariantBreach("termination argument violated: offer loop cap")
            i, j, s, c, avail, vi = hit
            if c in avail and self.val(i, c) > vi:
                self.X.assign(i, [c])
            else:
                self.X.assign(j, [s])

    def repair_loop(self):
        while True:
            rep = envy_report(self.profile, self.inst, self.X)
            envied = set(rep.envied)
            target = None
            for a in rep.envied:
                b = rep.p_or_none(a)
                if b is None:
                    raise InvariantBreach(f"envied vertex {a} has no unique envier")
                if b in envied and all(r in envied for r in self.inst.neighbors(b)):
                    target = (a, b)
                    break
            if target is None:
                return
            a, b = target
            c = rep.p(b)
            self.repairs.append((a, b, c))
            if len(self.repairs) > self.inst.n:
                raise InvariantBreach("termination argument violated: repair rounds exceed n")
            self.X.assign(b, [])
            own = set()
            for r in self.inst.neighbors(b):
                p = (min(b, r), max(b, r))
                own.update(self.table.cuts[p][b])
                self.aux[r] -= set(self.table.cuts[p][r])
            self.aux[b] = own
            for v in range(self.inst.n):
                for h in self.X.holdings[v]:
                    if h not in self.aux[v]:
                        raise InvariantBreach(f"vertex {v} holds bundle {h} outside its auxiliary set")
            self.offer_loop()

    def cleanup(self) -> BundleTable:
        held = self.X.holdings
        for i in range(self.inst.n):
            for j in self.inst.neighbors(i):
                p = (min(i, j), max(i, j))
                icut = set(self.table.cuts[p][i])
                jcut = set(self.table.cuts[p][j])
                everything = set(self.table.partitions[p].bundles)
                if icut & set(held[i] + held[j]) or everything <= self.available(p):
                    self.aux[i] -= jcut
                    self.aux[j] -= jcut
        keep = {}
        for p, cuts in self.table.cuts.items():
            a, b = p
            mine = {v: set(self.table.partitions[p].bundles) & self.aux[v] for v in p}
            if mine[a] != mine[b]:
                raise InvariantBreach(f"pair {p}: endpoints disagree on their final bundles")
            match = [v for v, cut in cuts.items() if set(cut) == mine[a]]
            if len(match) != 1:
                raise InvariantBreach(f"pair {p}: final bundles are not a single cut")
            keep[p] = match[0]
        return self.table.finalize(keep)


def step1_girth(profile: ValuationProfile, inst: MultigraphInstance, table: BundleTable):
    """Offer loop, repair loop, cleanup. Returns (state, final table, info)."""
    g = _GirthStep(profile, inst, table)
    g.offer_loop()
    g.repair_loop()
    final = g.cleanup()
    X = g.X.copy(table=final)
    for v in range(inst.n):
        for b in X.holdings[v]:
            if b not in final.bundles:
                raise InvariantBreach(f"vertex {v} holds bundle {b} dropped by the cleanup")
    return X, final, {"offers": g.offers, "repairs": g.repairs}


# --------------------------------------------------------------------------
# step 2


def _improve_nonenvied(profile, inst, X, counter):
    while True:
        rep = envy_report(profile, inst, X)
        fired = False
        for k in range(inst.n):
            if rep.is_envied(k):
                continue
            best = unpb(profile, inst, X, X.table, k, rep)
            vb = profile.value_mask(k, X.table.union_mask(best))
            vx = rep.values[k]
            if vb > vx or (vb == vx and len(best) > len(X.holdings[k])):
                X.assign(k, best)
                counter[0] += 1
                if counter[0] > LOOP_CAP:
                    raise InvariantBreach("termination argument violated: improvement loop cap")
                fired = True
                break
        if not fired:
            return


def step2_reduce_envy(profile: ValuationProfile, inst: MultigraphInstance, X: AllocationState,
                      table: BundleTable | None = None):
    """Envy reduction; returns (state, stats). ``X`` is not modified."""
    X = X.copy(table=table or X.table)
    entry = envy_report(profile, inst, X)
    calm_at_entry = {v for v in range(inst.n) if not entry.is_envied(v)}
    counter = [0]
    rounds = 0
    released = 0
    _improve_nonenvied(profile, inst, X, counter)
    while True:
        rep = envy_report(profile, inst, X)
        pick = None
        for i in rep.envied:
            best = unpb(profile, inst, X, X.table, i, rep)
            if profile.value_mask(i, X.table.union_mask(best)) > rep.values[i]:
                pick = (i, best)
                break
        if pick is None:
            break
        rounds += 1
        if rounds > inst.n:
            raise InvariantBreach("termination argument violated: more than n envy rounds")
        i, best = pick
        p = rep.p(i)
        fam = set(X.table.family(i))
        t = [b for b in X.holdings[p] if b in fam]
        if t and t[0] in best:
            X.assign(p, [])
            released += 1
        X.assign(i, best)
        while True:
            hit = None
            for j in range(inst.n):
                b, vb = _argmax_bundle(profile, X.table, j, X.ub(j))
                if b is not None and vb > _held_value(profile, X, j):
                    hit = (j, b)
                    break
            if hit is None:
                break
            counter[0] += 1
            if counter[0] > LOOP_CAP:
                raise InvariantBreach("termination argument violated: inner offer loop cap")
            X.assign(hit[0], [hit[1]])
        _improve_nonenvied(profile, inst, X, counter)
    final = envy_report(profile, inst, X)
    for v in sorted(calm_at_entry):
        if final.is_envied(v):
            raise InvariantBreach(f"vertex {v} was non-envied at step-2 entry but is envied at exit")
    return X, {"step2_rounds": rounds, "step2_moves": counter[0], "step2_releases": released}


# --------------------------------------------------------------------------
# step 3


RECIPE = "recipe"
FALLBACK = "fallback"


def _safe(profile, inst, X, rep, k, bid):
    a, b = X.table.pair_of(bid)
    if k in (a, b) or rep.is_envied(k):
        return False
    pair = (a, b)
    if any(X.table.pair_of(h) == pair for h in X.bundles_of(k)):
        return False
    merged = X.mask(k) | X.table.mask(bid)
    return all(profile.value_mask(l, X.mask(l)) >= profile.value_mask(l, merged) for l in (a, b))


def _recipe(inst, rep, regime, bid, table):
    i, j = table.pair_of(bid)
    out: list[int] = []
    calm = lambda v: v is not None and not rep.is_envied(v)  # noqa: E731
    if regime == BIPARTITE:
        for x in (i, j):
            if rep.is_envied(x):
                out.append(rep.p(x))
    elif regime == BOUNDED:
        close = {i, j} | set(inst.neighbors(i)) | set(inst.neighbors(j))
        out = [v for v in range(inst.n) if v not in close and calm(v)]
    elif regime == GIRTH6:
        for x, y in ((i, j), (j, i)):
            if not rep.is_envied(x):
                continue
            px = rep.p(x)
            hub = px
            if y == px:
                hub = rep.p_or_none(y)
                if hub is None:
                    continue
            if calm(hub):
                out.append(hub)
            out.extend(v for v in inst.neighbors(hub) if calm(v))
    seen, uniq = set(), []
    for v in out:
        if v not in seen:
            seen.add(v)
            uniq.append(v)
    return uniq


def step3_finalize(profile: ValuationProfile, inst: MultigraphInstance, X: AllocationState, regime: str):
    """Park each unallocated bundle (ascending id); returns (state, parks)."""
    X = X.copy()
    parks = []
    for bid in X.unallocated():
        rep = envy_report(profile, inst, X)
        chosen, branch = None, None
        for k in _recipe(inst, rep, regime, bid, X.table):
            if _safe(profile, inst, X, rep, k, bid):
                chosen, branch = k, RECIPE
                break
        if chosen is None:
            for k in range(inst.n):
                if _safe(profile, inst, X, rep, k, bid):
                    chosen, branch = k, FALLBACK
                    break
        if chosen is None:
            raise InvariantBreach(f"no safe vertex for bundle {bid} of pair {X.table.pair_of(bid)}")
        X.park(chosen, bid)
        parks.append((bid, chosen, branch))
    return X, parks


# --------------------------------------------------------------------------
# solve


@dataclass
class Solution:
    allocation: list[tuple[int, ...]]
    trace: PipelineTrace
    regime: str
    stats: dict[str, int] = field(default_factory=dict)
    report: RegimeReport | None = None


def choose_regime(report: RegimeReport, forced: str | None = None) -> str:
    if forced is not None:
        if forced not in report.applicable_regimes:
            raise NoApplicableRegime(f"regime {forced!r} does not apply to this instance", report)
        return forced
    for r in REGIME_PRIORITY:
        if r in report.applicable_regimes:
            return r
    raise NoApplicableRegime(
        "no regime applies: not bipartite; "
        f"{report.max_neighbors} neighbors exceed the bound {report.neighbor_bound}; "
        f"simple girth {report.simple_girth} is below 6",
        report,
    )


def _snapshot(name, X, props, **kw):
    return StageSnapshot(name, X.table, list(X.holdings), list(X.parked),
                         [(p.name, p.ok, p.witness) for p in props], **kw)


def _require(trace, props, stage):
    for p in props:
        if not p.ok:
            raise InvariantBreach(f"{stage}: property {p.name} failed: {p.witness}", trace)


def solve(profile: ValuationProfile, inst: MultigraphInstance, regime: str | None = None) -> Solution:
    report = detect_regimes(inst)
    regime = choose_regime(report, regime)
    trace = PipelineTrace(regime=regime, n=inst.n)
    stats: dict[str, int] = {}
    table = build_bundle_table(profile, inst, regime, check=False)
    if regime == BIPARTITE:
        X1 = step1_bipartite(profile, inst, table, report.coloring)
    elif regime == BOUNDED:
        X1, _H, _match, weight = step1_bounded(profile, inst, table)
        stats["matching_weight"] = weight
    elif regime == GIRTH6:
        trace.notes.append(NOTE_OFFER)
        X1, table, info = step1_girth(profile, inst, table)
        stats["offers"] = info["offers"]
        stats["repair_rounds"] = len(info["repairs"])
    else:  # pragma: no cover - choose_regime filters this
        raise PreconditionError(regime)
    trace.notes.append(NOTE_INNER)
    table.validate(inst)

    rep1 = envy_report(profile, inst, X1)
    stats["envied_after_step1"] = len(rep1.envied)
    names = ("P1", "P2", STEP1_PROPS[regime])
    props = [check_property(profile, inst, X1, table, w, rep=rep1) for w in names]
    trace.stages.append(_snapshot("step1", X1, props, stats={k: v for k, v in stats.items()}))
    _require(trace, props, "step1")

    X2, s2 = step2_reduce_envy(profile, inst, X1, table)
    stats.update(s2)
    rep2 = envy_report(profile, inst, X2)
    names = ("P1", "P2", STEP1_PROPS[regime], "P4", "EQ1")
    if R_BOUND[regime] == 2:
        # With three bundles per pair, two non-envied endpoints may leave one behind.
        names += ("UNALLOC_ENVIED",)
    props = [check_property(profile, inst, X2, table, w, rep=rep2, r=R_BOUND[regime]) for w in names]
    stats["envied_after_step2"] = len(rep2.envied)
    trace.stages.append(_snapshot("step2", X2, props, stats=dict(s2)))
    _require(trace, props, "step2")

    X3, parks = step3_finalize(profile, inst, X2, regime)
    stats["parked_bundles"] = len(parks)
    stats["fallback_parks"] = sum(1 for p in parks if p[2] == FALLBACK)
    real = [X3.mask(v) & ~inst.dummy_mask for v in range(inst.n)]
    done = []
    allocated = 0
    for m in real:
        allocated |= m
    complete = allocated == sum(1 << e for e in inst.real_edges)
    done.append(PropertyResult("COMPLETE", complete, "" if complete else "some edge is unallocated"))
    unchanged = X3.holdings == X2.holdings
    done.append(PropertyResult("STEP2_KEPT", unchanged, "" if unchanged else "holdings changed"))
    bad = is_efx(profile, inst, real)
    done.append(PropertyResult("EFX", not bad, "" if not bad else "vertex %d vs %d removing edge %d" % bad[0]))
    trace.stages.append(_snapshot("step3", X3, done, parks=parks,
                                  stats={"parked_bundles": len(parks),
                                         "fallback_parks": stats["fallback_parks"]}))
    allocation = [tuple(e for e in inst.real_edges if m >> e & 1) for m in real]
    trace.final = allocation
    _require(trace, done, "step3")
    return Solution(allocation, trace, regime, stats, report)
