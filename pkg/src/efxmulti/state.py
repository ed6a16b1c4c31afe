"""Allocation state over a bundle table, envy queries and property checks."""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

from efxmulti.cuts import BundleTable
from efxmulti.errors import InvariantBreach, PreconditionError
from efxmulti.instance import MultigraphInstance
from efxmulti.valuation import ValuationProfile

PROPERTIES = ("P1", "P2", "P3_1", "P3_2", "P3_3", "P4", "EQ1", "UNALLOC_ENVIED")


class AllocationState:
    """Per-vertex held bundles plus bundles parked during the final step.

    ``holdings[i]`` and ``parked[i]`` are sorted tuples of bundle ids.
    """

    def __init__(self, table: BundleTable, n: int):
        self.table = table
        self.n = n
        self.holdings: list[tuple[int, ...]] = [() for _ in range(n)]
        self.parked: list[tuple[int, ...]] = [() for _ in range(n)]
        self._owner: dict[int, int] = {}

    def copy(self, table: BundleTable | None = None) -> "AllocationState":
        other = AllocationState(table or self.table, self.n)
        other.holdings = list(self.holdings)
        other.parked = list(self.parked)
        other._owner = dict(self._owner)
        return other

    def owner(self, bid: int) -> int | None:
        return self._owner.get(bid)

    def bundles_of(self, i: int) -> tuple[int, ...]:
        return tuple(sorted(self.holdings[i] + self.parked[i]))

    def mask(self, i: int) -> int:
        return self.table.union_mask(self.holdings[i] + self.parked[i])

    def assign(self, i: int, bids: Iterable[int]) -> None:
        """Replace X_i by ``bids``, releasing whatever i held before."""
        bids = tuple(sorted(set(bids)))
        for b in bids:
            o = self._owner.get(b)
            if o is not None and o != i:
                raise InvariantBreach(f"bundle {b} already held by vertex {o}")
        for b in self.holdings[i]:
            del self._owner[b]
        self.holdings[i] = bids
        for b in bids:
            self._owner[b] = i

    def park(self, k: int, bid: int) -> None:
        if bid in self._owner:
            raise InvariantBreach(f"bundle {bid} already held by vertex {self._owner[bid]}")
        self.parked[k] = tuple(sorted(self.parked[k] + (bid,)))
        self._owner[bid] = k

    def allocated(self) -> set[int]:
        return set(self._owner)

    def unallocated(self) -> tuple[int, ...]:
        return tuple(b for b in self.table.bundles if b not in self._owner)

    def ub(self, i: int) -> tuple[int, ...]:
        """Unallocated bundles of B_i."""
        return tuple(b for b in self.table.family(i) if b not in self._owner)

    def edge_masks(self) -> list[int]:
        return [self.mask(i) for i in range(self.n)]


# --------------------------------------------------------------------------
# envy


@dataclass
class EnvyReport:
    envies: list[tuple[int, int]]
    envied: tuple[int, ...]
    enviers: dict[int, tuple[int, ...]]
    values: list[int]

    def p(self, i: int) -> int:
        """The unique envier of envied vertex ``i``."""
        ws = self.enviers.get(i, ())
        if len(ws) != 1:
            raise PreconditionError(f"vertex {i} has {len(ws)} enviers; p_i is not unique")
        return ws[0]

    def p_or_none(self, i: int) -> int | None:
        ws = self.enviers.get(i, ())
        return ws[0] if len(ws) == 1 else None

    def is_envied(self, i: int) -> bool:
        return i in self.enviers


def _masks(X) -> list[int]:
    return X.edge_masks() if isinstance(X, AllocationState) else list(X)


def envy_report(profile: ValuationProfile, inst: MultigraphInstance, X) -> EnvyReport:
    """Exact pairwise envy; ``X`` is an AllocationState or per-vertex edge masks."""
    masks = _masks(X)
    n = len(masks)
    values = [profile.value_mask(i, masks[i]) for i in range(n)]
    envies, enviers = [], {}
    for j in range(n):
        for i in range(n):
            if i != j and masks[j] and profile.value_mask(i, masks[j]) > values[i]:
                envies.append((i, j))
                enviers.setdefault(j, []).append(i)
    envies.sort()
    return EnvyReport(envies, tuple(sorted(enviers)), {j: tuple(w) for j, w in enviers.items()}, values)


def is_efx(profile: ValuationProfile, inst: MultigraphInstance, X) -> list[tuple[int, int, int]]:
    """All (i, j, g) with v_i(X_i) < v_i(X_j minus g); empty means EFX."""
    masks = _masks(X)
    out = []
    for i in range(len(masks)):
        vi = profile.value_mask(i, masks[i])
        for j in range(len(masks)):
            if j == i or not masks[j]:
                continue
            if profile.value_mask(i, masks[j]) <= vi:
                continue
            rest = masks[j]
            while rest:
                low = rest & -rest
                rest ^= low
                if profile.value_mask(i, masks[j] ^ low) > vi:
                    out.append((i, j, low.bit_length() - 1))
    return out


# --------------------------------------------------------------------------
# UNPB


def unpb_pool(X: AllocationState, i: int, rep: EnvyReport) -> tuple[int, ...]:
    pool = set(X.ub(i))
    if rep.is_envied(i):
        p = rep.p(i)
        fam = set(X.table.family(i))
        t = [b for b in X.holdings[p] if b in fam]
        if len(t) > 1:
            raise InvariantBreach(f"vertex {p} holds {len(t)} bundles parallel to vertex {i}")
        pool.update(t)
    else:
        pool.update(X.holdings[i])
    return tuple(sorted(pool))


def best_nonparallel(profile: ValuationProfile, table: BundleTable, i: int,
                     pool: Sequence[int]) -> tuple[int, ...]:
    """Most valued pool subset with at most one bundle per pair, then the
    largest such subset, then the lexicographically first."""
    by_pair: dict[tuple[int, int], list[int]] = {}
    for b in sorted(pool):
        by_pair.setdefault(table.pair_of(b), []).append(b)
    groups = [by_pair[p] for p in sorted(by_pair)]
    best, best_key = (), None
    for combo in itertools.product(*groups):
        val = profile.value_mask(i, table.union_mask(combo))
        key = (val, len(combo))
        if best_key is None or key > best_key:
            best, best_key = tuple(sorted(combo)), key
    return best


def unpb(profile: ValuationProfile, inst: MultigraphInstance, X: AllocationState,
         table: BundleTable | None, i: int, rep: EnvyReport | None = None) -> tuple[int, ...]:
    rep = rep or envy_report(profile, inst, X)
    return best_nonparallel(profile, table or X.table, i, unpb_pool(X, i, rep))


# --------------------------------------------------------------------------
# properties


@dataclass
class PropertyResult:
    name: str
    ok: bool
    witness: str = ""

    def __bool__(self):
        return self.ok


def _fmt(ids) -> str:
    return ",".join(map(str, ids)) or "-"


def _p1(profile, inst, X: AllocationState, rep) -> PropertyResult:
    seen = 0
    for i in range(X.n):
        if X.parked[i]:
            return PropertyResult("P1", False, f"vertex {i} holds parked bundles")
        fam = set(X.table.family(i))
        pairs = set()
        for b in X.holdings[i]:
            if b not in fam:
                return PropertyResult("P1", False, f"vertex {i} holds bundle {b} outside its family")
            p = X.table.pair_of(b)
            if p in pairs:
                return PropertyResult("P1", False, f"vertex {i} holds two bundles of pair {p}")
            pairs.add(p)
        m = X.mask(i)
        if m & seen:
            return PropertyResult("P1", False, f"vertex {i} shares edges with another vertex")
        seen |= m
    bad = is_efx(profile, inst, X)
    if bad:
        i, j, g = bad[0]
        return PropertyResult("P1", False, f"vertex {i} vs {j} removing edge {g}")
    return PropertyResult("P1", True)


def check_property(profile: ValuationProfile, inst: MultigraphInstance, X: AllocationState,
                   table: BundleTable | None, which: str,
                   universe: Callable[[int], Iterable[int]] | None = None,
                   rep: EnvyReport | None = None, r: int | None = None) -> PropertyResult:
    """Check one property; ``universe(i)`` overrides the bundles tested by P2,
    and ``r`` is the per-pair bundle bound used by EQ1."""
    table = table or X.table
    rep = rep or envy_report(profile, inst, X)
    envied = set(rep.envied)
    if which == "P1":
        return _p1(profile, inst, X, rep)
    if which == "P2":
        for i in range(X.n):
            vi = rep.values[i]
            for b in (universe(i) if universe else X.ub(i)):
                if profile.value_mask(i, table.mask(b)) > vi:
                    return PropertyResult("P2", False, f"vertex {i} prefers unallocated bundle {b}")
        return PropertyResult("P2", True)
    if which == "P3_1":
        for a, b in inst.pairs:
            if a in envied and b in envied:
                return PropertyResult("P3_1", False, f"adjacent envied {a},{b}")
        return PropertyResult("P3_1", True)
    if which == "P3_2":
        ok = len(envied) <= X.n // 2
        return PropertyResult("P3_2", ok, "" if ok else f"{len(envied)} envied > {X.n // 2}")
    if which == "P3_3":
        for a in sorted(envied):
            p = rep.p_or_none(a)
            if p is None:
                return PropertyResult("P3_3", False, f"vertex {a} has no unique envier")
            if p in envied and all(r_ in envied for r_ in inst.neighbors(p)):
                return PropertyResult("P3_3", False, f"envied {a}: {p} and all its neighbors envied")
        return PropertyResult("P3_3", True)
    if which == "P4":
        for i in range(X.n):
            best = unpb(profile, inst, X, table, i, rep)
            if profile.value_mask(i, table.union_mask(best)) > rep.values[i]:
                return PropertyResult("P4", False, f"vertex {i} prefers {_fmt(best)}")
        return PropertyResult("P4", True)
    if which == "EQ1":
        if r is None:
            raise PreconditionError("EQ1 needs r")
        un = X.unallocated()
        for p, part in table.partitions.items():
            q = sum(1 for v in p if v in envied)
            cnt = sum(1 for b in part.bundles if b in un)
            if cnt > r + q - 2:
                return PropertyResult("EQ1", False, f"pair {p}: {cnt} unallocated > {r}+{q}-2")
        return PropertyResult("EQ1", True)
    if which == "UNALLOC_ENVIED":
        for b in X.unallocated():
            a, c = table.pair_of(b)
            if a not in envied and c not in envied:
                return PropertyResult("UNALLOC_ENVIED", False, f"bundle {b} between non-envied {a},{c}")
        return PropertyResult("UNALLOC_ENVIED", True)
    raise PreconditionError(f"unknown property {which!r}")
