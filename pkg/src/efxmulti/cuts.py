"""EFX-cuts, cut-and-choose bundles, common cuts and the 3-partition.

Every search here is exhaustive over bipartitions of one pair class, so the
pair class size is capped (``MAX_CLASS``). Ties in "most valued" choices
are broken toward the earlier part, which is also the lower bundle id.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

from efxmulti import kernels
from efxmulti.errors import NonMonotoneError, PreconditionError, InvariantBreach
from efxmulti.instance import BIPARTITE, BOUNDED, GIRTH6, MultigraphInstance, detect_regimes
from efxmulti.valuation import ValuationProfile

MAX_CLASS = 16

COMMON_2 = "common-2"
THREE_PART = "three-part"
ORIENTED_2 = "oriented-2"
AUX_4 = "aux-4"


def _mask(edges) -> int:
    out = 0
    for e in edges:
        out |= 1 << e
    return out


def _dense(profile: ValuationProfile, v: int, edges: Sequence[int]) -> list[int]:
    """v's values on all subsets of ``edges`` (local bit t = edges[t])."""
    k = len(edges)
    glob = [0] * (1 << k)
    table = [0] * (1 << k)
    for s in range(1, 1 << k):
        low = s & -s
        glob[s] = glob[s ^ low] | (1 << edges[low.bit_length() - 1])
        table[s] = profile.value_mask(v, glob[s])
    return table


def _split(edges: Sequence[int], local_p1: int) -> tuple[tuple[int, ...], tuple[int, ...]]:
    p1 = tuple(e for t, e in enumerate(edges) if local_p1 >> t & 1)
    p2 = tuple(e for t, e in enumerate(edges) if not local_p1 >> t & 1)
    return p1, p2


def _check_class(edges: Sequence[int]) -> tuple[int, ...]:
    edges = tuple(sorted(edges))
    if not edges:
        raise PreconditionError("empty edge set")
    if len(edges) > MAX_CLASS:
        raise PreconditionError(f"pair class of size {len(edges)} exceeds the cap {MAX_CLASS}")
    return edges


def is_efx_cut(profile: ValuationProfile, cutter: int, p1, p2) -> bool:
    """Whether the cutter is EFX-satisfied holding either part."""
    v = profile.value
    a, b = v(cutter, p1), v(cutter, p2)
    if any(a < v(cutter, [e for e in p2 if e != g]) for g in p2):
        return False
    return all(b >= v(cutter, [e for e in p1 if e != g]) for g in p1)


def efx_cut(profile: ValuationProfile, cutter: int, edges: Sequence[int]) -> tuple[tuple[int, ...], tuple[int, ...]]:
    """The cutter's lexicographically first EFX-cut of ``edges``.

    P1 always holds the smallest edge id and both parts are nonempty when
    there are at least two edges.

    >>> from efxmulti.instance import build_instance
    >>> from efxmulti.valuation import additive_profile
    >>> inst = build_instance(2, [(0, 1)] * 3)
    >>> prof = additive_profile(inst, {0: {0: 5, 1: 3, 2: 2}})
    >>> efx_cut(prof, 0, (0, 1, 2))
    ((0,), (1, 2))
    """
    edges = _check_class(edges)
    if len(edges) == 1:
        return edges, ()
    local = kernels.efx_cut_scan([_dense(profile, cutter, edges)], len(edges))
    if local < 0:
        raise NonMonotoneError(f"no EFX-cut for vertex {cutter} on {edges}; valuation is not monotone")
    return _split(edges, local)


def find_common_cut(profile: ValuationProfile, i: int, j: int, edges: Sequence[int]):
    """First bipartition that is an EFX-cut for both endpoints, or None."""
    edges = _check_class(edges)
    if len(edges) == 1:
        return None
    local = kernels.efx_cut_scan([_dense(profile, i, edges), _dense(profile, j, edges)], len(edges))
    if local < 0:
        return None
    return _split(edges, local)


def _pick(profile: ValuationProfile, chooser: int, parts) -> int:
    """Index of the chooser's most valued part; ties go to the earlier one."""
    best, best_v = 0, None
    for idx, part in enumerate(parts):
        val = profile.value(chooser, part)
        if best_v is None or val > best_v:
            best, best_v = idx, val
    return best


def choose_bundles(profile: ValuationProfile, i: int, j: int, edges: Sequence[int]):
    """(B^i_ji, B^j_ji, B^i_ij, B^j_ij): the superscript vertex's piece when the
    first subscript vertex cuts and the other one picks."""
    cut_j = efx_cut(profile, j, edges)
    k = _pick(profile, i, cut_j)
    b_i_ji, b_j_ji = cut_j[k], cut_j[1 - k]
    cut_i = efx_cut(profile, i, edges)
    k = _pick(profile, j, cut_i)
    b_j_ij, b_i_ij = cut_i[k], cut_i[1 - k]
    return b_i_ji, b_j_ji, b_i_ij, b_j_ij


def three_partition(profile: ValuationProfile, i: int, j: int, edges: Sequence[int]):
    """Split a pair without a common cut into three parts whose most valued
    part differs between ``i`` and ``j``. Returns (P1, P2 minus g, {g})."""
    edges = _check_class(edges)
    if find_common_cut(profile, i, j, edges) is not None:
        raise PreconditionError(f"pair ({i}, {j}) has a common EFX-cut")
    a, b = efx_cut(profile, i, edges)
    v = profile.value
    p1 = p2 = None
    # j is EFX-dissatisfied against at most one part of i's cut.
    for hold, other in ((a, b), (b, a)):
        if any(v(j, [e for e in other if e != g]) > v(j, hold) for g in other):
            p1, p2 = hold, other
            break
    if p1 is None:
        raise PreconditionError(f"pair ({i}, {j}): vertex {j} accepts both parts of the cut")
    vi1 = v(i, p1)
    for g in p2:
        rest = tuple(e for e in p2 if e != g)
        if v(j, rest) > v(j, p1) and v(i, rest) <= vi1 and v(i, [g]) <= vi1:
            parts = (p1, rest, (g,))
            if _pick(profile, i, parts) == _pick(profile, j, parts):
                raise InvariantBreach(f"pair ({i}, {j}): 3-partition argmax coincide")
            return parts
    raise PreconditionError(f"pair ({i}, {j}): no qualifying good in {p2}")


# --------------------------------------------------------------------------
# bundle table


@dataclass(frozen=True)
class Bundle:
    id: int
    pair: tuple[int, int]
    edges: tuple[int, ...]

    @property
    def mask(self) -> int:
        return _mask(self.edges)


@dataclass(frozen=True)
class PairPartition:
    pair: tuple[int, int]
    kind: str
    bundles: tuple[int, ...]
    cutter: int | None = None


@dataclass
class BundleTable:
    """Bundles per adjacent pair.

    In auxiliary mode (``kind == AUX_4`` for every pair) ``cuts`` maps each
    pair and cutter to ``(chooser piece id, cutter piece id)``.
    """

    bundles: dict[int, Bundle]
    partitions: dict[tuple[int, int], PairPartition]
    cuts: dict[tuple[int, int], dict[int, tuple[int, int]]] = field(default_factory=dict)

    def __post_init__(self):
        self._families: dict[int, tuple[int, ...]] = {}
        fam: dict[int, list[int]] = {}
        for p, part in self.partitions.items():
            for v in p:
                fam.setdefault(v, []).extend(part.bundles)
        self._families = {v: tuple(sorted(ids)) for v, ids in fam.items()}
        self._masks = {b.id: b.mask for b in self.bundles.values()}

    def family(self, v: int) -> tuple[int, ...]:
        return self._families.get(v, ())

    def pair_of(self, bid: int) -> tuple[int, int]:
        return self.bundles[bid].pair

    def mask(self, bid: int) -> int:
        return self._masks[bid]

    def union_mask(self, bids) -> int:
        out = 0
        for b in bids:
            out |= self._masks[b]
        return out

    @property
    def is_aux(self) -> bool:
        return any(p.kind == AUX_4 for p in self.partitions.values())

    def validate(self, inst: MultigraphInstance) -> None:
        """Raise InvariantBreach unless every pair's bundles partition its class."""
        if set(self.partitions) != set(inst.pairs):
            raise InvariantBreach("bundle table pairs differ from instance pairs")
        for p, part in self.partitions.items():
            blocks = [self.bundles[b] for b in part.bundles]
            if any(b.pair != p or not b.edges for b in blocks):
                raise InvariantBreach(f"pair {p}: bad bundle")
            if part.kind == AUX_4:
                for cutter, (x, y) in self.cuts[p].items():
                    got = sorted(self.bundles[x].edges + self.bundles[y].edges)
                    if tuple(got) != inst.pair_classes[p]:
                        raise InvariantBreach(f"pair {p}: cut of {cutter} does not partition the class")
                continue
            got = sorted(e for b in blocks for e in b.edges)
            if tuple(got) != inst.pair_classes[p]:
                raise InvariantBreach(f"pair {p}: bundles do not partition the class")

    def finalize(self, keep: dict[tuple[int, int], int]) -> "BundleTable":
        """Oriented table keeping, for each pair, the cut of ``keep[pair]``."""
        bundles, parts = {}, {}
        for p in self.partitions:
            cutter = keep[p]
            x, y = self.cuts[p][cutter]
            ids = tuple(sorted((x, y)))
            for b in ids:
                bundles[b] = self.bundles[b]
            parts[p] = PairPartition(p, ORIENTED_2, ids, cutter)
        return BundleTable(dict(sorted(bundles.items())), parts)


def build_bundle_table(profile: ValuationProfile, inst: MultigraphInstance, regime: str,
                       coloring: Sequence[int] | None = None, check: bool = True) -> BundleTable:
    """Bundle table for ``regime``; girth tables come out in auxiliary mode."""
    report = detect_regimes(inst)
    if check and regime not in report.applicable_regimes:
        raise PreconditionError(f"regime {regime!r} does not apply to this instance")
    if regime == BIPARTITE:
        coloring = coloring or report.coloring
        if coloring is None:
            raise PreconditionError("bipartite table needs a 2-coloring")
    bundles: dict[int, Bundle] = {}
    parts: dict[tuple[int, int], PairPartition] = {}
    cuts: dict[tuple[int, int], dict[int, tuple[int, int]]] = {}
    nxt = 0

    def add(pair, pieces):
        nonlocal nxt
        ids = []
        for piece in pieces:
            bundles[nxt] = Bundle(nxt, pair, tuple(sorted(piece)))
            ids.append(nxt)
            nxt += 1
        return tuple(ids)

    for pair, edges in inst.pair_classes.items():
        i, j = pair
        if regime == BIPARTITE:
            a_side, cutter = (i, j) if coloring[j] == 1 else (j, i)
            cut = efx_cut(profile, cutter, edges)
            k = _pick(profile, a_side, cut)
            ids = add(pair, (cut[k], cut[1 - k]))
            parts[pair] = PairPartition(pair, ORIENTED_2, ids, cutter)
        elif regime == BOUNDED:
            common = find_common_cut(profile, i, j, edges)
            if common is not None:
                parts[pair] = PairPartition(pair, COMMON_2, add(pair, common))
            else:
                parts[pair] = PairPartition(pair, THREE_PART, add(pair, three_partition(profile, i, j, edges)))
        elif regime == GIRTH6:
            b_i_ji, b_j_ji, b_i_ij, b_j_ij = choose_bundles(profile, i, j, edges)
            ids = add(pair, (b_j_ij, b_i_ij, b_i_ji, b_j_ji))
            cuts[pair] = {i: (ids[0], ids[1]), j: (ids[2], ids[3])}
            parts[pair] = PairPartition(pair, AUX_4, ids)
        else:
            raise PreconditionError(f"unknown regime {regime!r}")
    table = BundleTable(bundles, parts, cuts)
    table.validate(inst)
    return table
