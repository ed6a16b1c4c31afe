"""Independent checks: exhaustive EFX enumeration, allocation certificates
and trace audits. Nothing here calls into the pipeline or state modules;
envy, EFX and best non-parallel selections are recomputed from raw edge
sets and the valuation oracle.
"""

from __future__ import annotations

import itertools
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

from efxmulti import kernels
from efxmulti.errors import PreconditionError
from efxmulti.instance import BIPARTITE, BOUNDED, GIRTH6, MultigraphInstance
from efxmulti.trace import PipelineTrace, StageSnapshot
from efxmulti.valuation import ValuationProfile

ORACLE_CAP = 10**7


# --------------------------------------------------------------------------
# brute force


@dataclass
class OracleResult:
    allocations: list[tuple[tuple[int, ...], ...]]
    count: int
    assignments: int

    def contains(self, allocation: Sequence[Sequence[int]]) -> bool:
        key = tuple(tuple(sorted(x)) for x in allocation)
        return key in set(self.allocations)


def _kernel_inputs(profile: ValuationProfile, inst: MultigraphInstance):
    m = inst.m
    lbit = [-1] * (inst.n * m)
    tables = []
    for i, vv in enumerate(profile.vertices):
        for k, e in enumerate(vv.edges):
            lbit[i * m + e] = k
        tables.append(vv.dense_table())
    return lbit, tables


def _enum_job(args):
    n, m, lbit, tables, first, limit = args
    return kernels.efx_enumerate(n, m, lbit, tables, first, limit)


def brute_force_efx(profile: ValuationProfile, inst: MultigraphInstance, cap: int = ORACLE_CAP,
                    workers: int = 1, limit: int = 1 << 62) -> OracleResult:
    """Every complete EFX allocation of the real edges to any vertices.

    Refuses (PreconditionError) when n^m exceeds ``cap``. With ``workers > 1``
    the search is split on the owner of edge 0.
    """
    n, m = inst.n, inst.m
    total = n ** m
    if total > cap:
        raise PreconditionError(f"oracle refused: {n}^{m} = {total} assignments exceed the cap {cap}")
    lbit, tables = _kernel_inputs(profile, inst)
    if workers > 1 and m >= 1 and n > 1:
        jobs = [(n, m, lbit, tables, first, limit) for first in range(n)]
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(_enum_job, jobs))
    else:
        parts = [kernels.efx_enumerate(n, m, lbit, tables, -1, limit)]
    owners, count = [], 0
    for found, c in parts:
        owners.extend(found)
        count += c
    allocs = []
    for own in owners[:limit]:
        per = [[] for _ in range(n)]
        for e, o in enumerate(own):
            per[o].append(e)
        allocs.append(tuple(tuple(x) for x in per))
    return OracleResult(allocs, count, total)


# --------------------------------------------------------------------------
# certificate


@dataclass
class Check:
    stage: str
    name: str
    ok: bool
    witness: str = ""

    def line(self) -> str:
        return f"check {self.stage} {self.name} {'pass' if self.ok else 'fail'} {self.witness}".rstrip()


@dataclass
class Report:
    checks: list[Check] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return all(c.ok for c in self.checks)

    def add(self, stage, name, ok, witness=""):
        self.checks.append(Check(stage, name, bool(ok), "" if ok else witness))

    def failures(self) -> list[Check]:
        return [c for c in self.checks if not c.ok]

    def to_text(self) -> str:
        lines = ["efx-report v1"] + [c.line() for c in self.checks]
        lines.append(f"result {'pass' if self.ok else 'fail'}")
        return "\n".join(lines) + "\n"


def efx_witness(profile: ValuationProfile, bundles: Sequence[Sequence[int]]):
    """First (i, j, g) breaking EFX, or None. Plain set arithmetic."""
    v = profile.value
    for i in range(len(bundles)):
        mine = v(i, bundles[i])
        for j in range(len(bundles)):
            if i == j:
                continue
            for g in bundles[j]:
                if v(i, [e for e in bundles[j] if e != g]) > mine:
                    return i, j, g
    return None


def check_allocation(profile: ValuationProfile, inst: MultigraphInstance,
                     allocation: Sequence[Sequence[int]], stage: str = "final") -> Report:
    rep = Report()
    counts = {}
    for i, xs in enumerate(allocation):
        for e in xs:
            counts[e] = counts.get(e, 0) + 1
    real = set(inst.real_edges)
    dup = [e for e, c in counts.items() if c > 1]
    missing = sorted(real - set(counts))
    extra = sorted(set(counts) - real)
    rep.add(stage, "vertices", len(allocation) == inst.n, f"{len(allocation)} rows for n={inst.n}")
    rep.add(stage, "disjoint", not dup, f"edge {dup[0] if dup else ''} held twice")
    rep.add(stage, "known-edges", not extra, f"edge {extra[0] if extra else ''} is not a real edge")
    rep.add(stage, "complete", not missing, f"edge {missing[0] if missing else ''} unallocated")
    w = efx_witness(profile, allocation)
    rep.add(stage, "efx", w is None, "vertex %d vs %d removing edge %d" % w if w else "")
    return rep


# --------------------------------------------------------------------------
# trace audit


def _edges(snap: StageSnapshot, bids) -> list[int]:
    out = []
    for b in bids:
        out.extend(snap.table.bundles[b].edges)
    return sorted(out)


def _envy(profile, bundles):
    n = len(bundles)
    val = [profile.value(i, bundles[i]) for i in range(n)]
    enviers = {}
    for i in range(n):
        for j in range(n):
            if i != j and bundles[j] and profile.value(i, bundles[j]) > val[i]:
                enviers.setdefault(j, []).append(i)
    return val, enviers


def _best_nonparallel_value(profile, snap, i, pool):
    groups = {}
    for b in pool:
        groups.setdefault(snap.table.bundles[b].pair, []).append(b)
    best = 0
    for combo in itertools.product(*[[None] + g for g in groups.values()]):
        chosen = [b for b in combo if b is not None]
        best = max(best, profile.value(i, _edges(snap, chosen)))
    return best


def _family(snap, v):
    return sorted((b for b in snap.table.bundles.values() if v in b.pair), key=lambda b: b.id)


def _audit_stage(profile, inst, snap: StageSnapshot, regime: str, rep: Report, *, orient: bool,
                 p4: bool):
    st = snap.name
    n = inst.n
    # table partitions each pair class
    for p, edges in inst.pair_classes.items():
        part = snap.table.partitions.get(p)
        got = sorted(e for b in (part.bundles if part else ()) for e in snap.table.bundles[b].edges)
        rep.add(st, "table", got == list(edges), f"pair {p} bundles do not partition its class")
        if part and regime != BOUNDED:
            rep.add(st, "two-bundles", len(part.bundles) == 2, f"pair {p} has {len(part.bundles)} bundles")
    bundles = [_edges(snap, snap.holdings[v] + snap.parked[v]) for v in range(n)]
    owner, twice = {}, []
    for v in range(n):
        for b in snap.holdings[v] + snap.parked[v]:
            if b in owner:
                twice.append(b)
            owner[b] = v
    rep.add(st, "single-holder", not twice, f"bundle {twice[0] if twice else ''} held twice")
    val, enviers = _envy(profile, bundles)
    envied = set(enviers)
    un = [b for b in snap.table.bundles if b not in owner]

    def ub(v):
        return [b.id for b in _family(snap, v) if b.id not in owner]

    if orient:
        ok, wit = True, ""
        for v in range(n):
            pairs = [snap.table.bundles[b].pair for b in snap.holdings[v]]
            if snap.parked[v] or any(v not in p for p in pairs) or len(set(pairs)) != len(pairs):
                ok, wit = False, f"vertex {v} holding is not an orientation"
                break
        w = efx_witness(profile, bundles)
        if ok and w:
            ok, wit = False, "vertex %d vs %d removing edge %d" % w
        rep.add(st, "P1", ok, wit)
        bad = [(v, b) for v in range(n) for b in ub(v)
               if profile.value(v, snap.table.bundles[b].edges) > val[v]]
        rep.add(st, "P2", not bad, "vertex %d prefers bundle %d" % bad[0] if bad else "")
        if regime == BIPARTITE:
            adj = [(a, b) for a, b in inst.pairs if a in envied and b in envied]
            rep.add(st, "P3_1", not adj, f"adjacent envied {adj[0]}" if adj else "")
        elif regime == BOUNDED:
            rep.add(st, "P3_2", len(envied) <= n // 2, f"{len(envied)} envied")
        elif regime == GIRTH6:
            ok, wit = True, ""
            for a in sorted(envied):
                if len(enviers[a]) != 1:
                    ok, wit = False, f"vertex {a} has {len(enviers[a])} enviers"
                    break
                p = enviers[a][0]
                if p in envied and all(r in envied for r in inst.neighbors(p)):
                    ok, wit = False, f"vertex {a}: envier {p} and its neighbors all envied"
                    break
            rep.add(st, "P3_3", ok, wit)
    if p4:
        ok, wit = True, ""
        for i in range(n):
            pool = set(ub(i))
            if i in envied:
                if len(enviers[i]) != 1:
                    ok, wit = False, f"vertex {i} has several enviers"
                    break
                p = enviers[i][0]
                pool |= {b for b in snap.holdings[p] if i in snap.table.bundles[b].pair}
            else:
                pool |= set(snap.holdings[i])
            best = _best_nonparallel_value(profile, snap, i, sorted(pool))
            if best > val[i]:
                ok, wit = False, f"vertex {i}: non-parallel selection worth {best} > {val[i]}"
                break
        rep.add(st, "P4", ok, wit)
        r = 3 if regime == BOUNDED else 2
        ok, wit = True, ""
        for p, part in snap.table.partitions.items():
            q = sum(1 for v in p if v in envied)
            cnt = sum(1 for b in part.bundles if b in un)
            if cnt > r + q - 2:
                ok, wit = False, f"pair {p}: {cnt} unallocated"
                break
        rep.add(st, "EQ1", ok, wit)
        if r == 2:
            lone = [b for b in un if not set(snap.table.bundles[b].pair) & envied]
            rep.add(st, "UNALLOC_ENVIED", not lone, f"bundle {lone[0]} has no envied endpoint" if lone else "")
    return val, envied


def audit_trace(profile: ValuationProfile, inst: MultigraphInstance, trace: PipelineTrace) -> Report:
    rep = Report()
    rep.add("trace", "n", trace.n == inst.n, f"trace n={trace.n}, instance n={inst.n}")
    names = [s.name for s in trace.stages]
    rep.add("trace", "stages", names == ["step1", "step2", "step3"], f"stages {names}")
    if not rep.ok:
        return rep
    regime = trace.regime
    for snap in trace.stages:
        for name, ok, wit in snap.properties:
            rep.add(snap.name, f"claimed-{name}", ok, wit or "claimed fail")
    s1, s2, s3 = trace.stages
    _audit_stage(profile, inst, s1, regime, rep, orient=True, p4=False)
    val2, envied2 = _audit_stage(profile, inst, s2, regime, rep, orient=True, p4=True)
    # step 3 only adds parked bundles to non-envied non-endpoints
    rep.add("step3", "holdings-kept", s3.holdings == s2.holdings, "step-2 holdings changed")
    ok, wit = True, ""
    for v in range(inst.n):
        for b in s3.parked[v]:
            if b not in s3.table.bundles:
                ok, wit = False, f"unknown parked bundle {b}"
            elif v in s3.table.bundles[b].pair:
                ok, wit = False, f"bundle {b} parked on its endpoint {v}"
            elif v in envied2:
                ok, wit = False, f"bundle {b} parked on envied vertex {v}"
            if not ok:
                break
        if not ok:
            break
    rep.add("step3", "parking", ok, wit)
    parked_pairs = [[s3.table.bundles[b].pair for b in s3.parked[v] if b in s3.table.bundles]
                    for v in range(inst.n)]
    dup = [v for v, ps in enumerate(parked_pairs) if len(set(ps)) != len(ps)]
    rep.add("step3", "no-parallel-parks", not dup, f"vertex {dup[0] if dup else ''} got parallel bundles")
    final = [
        tuple(e for e in _edges(s3, s3.holdings[v] + s3.parked[v]) if not inst.edge(e).is_dummy)
        for v in range(inst.n)
    ]
    rep.add("final", "matches-stage", trace.final is not None and list(map(tuple, trace.final)) == final,
            "final block differs from step-3 holdings")
    sub = check_allocation(profile, inst, final)
    rep.checks.extend(sub.checks)
    return rep
