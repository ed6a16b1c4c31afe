"""Monotone set valuations restricted to each vertex's relevant edges.

Values are Python integers throughout. A vertex valuation is defined on
subsets of its *real* relevant edges; any other edge, dummies included, is
projected away before lookup, which enforces both irrelevance and the
zero marginal of dummy edges.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

from efxmulti.errors import FormatError, ValuationError
from efxmulti.instance import MultigraphInstance

ADDITIVE = "additive"
TABLE = "table"
SEEDED = "seeded-monotone"

AUDIT_CAP = 16


class VertexValuation:
    """Valuation of one vertex over its real relevant edges.

    ``weights`` (additive) or ``table`` (indexed by local bitmask, local bit
    ``k`` standing for ``edges[k]``) must be given.
    """

    def __init__(self, edges: Sequence[int], *, weights=None, table=None, kind=None):
        self.edges = tuple(edges)
        self._local = {e: k for k, e in enumerate(self.edges)}
        if (weights is None) == (table is None):
            raise ValuationError("give exactly one of weights or table")
        if weights is not None:
            self.kind = kind or ADDITIVE
            self.weights = tuple(int(w) for w in weights)
            if len(self.weights) != len(self.edges):
                raise ValuationError("one weight per relevant edge required")
            if any(w < 0 for w in self.weights):
                raise ValuationError("additive weights must be nonnegative")
            self.table = None
        else:
            self.kind = kind or TABLE
            self.table = tuple(int(v) for v in table)
            if len(self.table) != 1 << len(self.edges):
                raise ValuationError("table must have 2^deg entries")
            self.weights = None
        self._cache: dict[int, int] = {}

    @property
    def degree(self) -> int:
        return len(self.edges)

    def local_mask(self, global_mask: int) -> int:
        local = 0
        for e, k in self._local.items():
            if global_mask >> e & 1:
                local |= 1 << k
        return local

    def value_local(self, local: int) -> int:
        if self.table is not None:
            return self.table[local]
        total = 0
        k = 0
        while local:
            if local & 1:
                total += self.weights[k]
            local >>= 1
            k += 1
        return total

    def value_mask(self, global_mask: int) -> int:
        got = self._cache.get(global_mask)
        if got is None:
            got = self.value_local(self.local_mask(global_mask))
            self._cache[global_mask] = got
        return got

    def dense_table(self) -> list[int]:
        """All 2^deg values, indexed by local mask."""
        if self.table is not None:
            return list(self.table)
        return [self.value_local(s) for s in range(1 << self.degree)]


class ValuationProfile:
    """Per-vertex valuations for one instance."""

    def __init__(self, inst: MultigraphInstance, vertices: Sequence[VertexValuation], kind: str):
        if len(vertices) != inst.n:
            raise ValuationError(f"expected {inst.n} vertex valuations, got {len(vertices)}")
        for i, vv in enumerate(vertices):
            if vv.edges != inst.relevant_real(i):
                raise ValuationError(f"vertex {i}: valuation domain differs from its relevant edges")
        self.inst = inst
        self.vertices = tuple(vertices)
        self.kind = kind

    @property
    def n(self) -> int:
        return len(self.vertices)

    def _vertex(self, i: int) -> VertexValuation:
        if not 0 <= i < len(self.vertices):
            raise ValuationError(f"unknown vertex {i}")
        return self.vertices[i]

    def value_mask(self, i: int, mask: int) -> int:
        return self._vertex(i).value_mask(mask)

    def value(self, i: int, edges: Iterable[int]) -> int:
        mask = 0
        for e in edges:
            mask |= 1 << e
        return self._vertex(i).value_mask(mask)


def value(profile: ValuationProfile, i: int, edges: Iterable[int]) -> int:
    """v_i(S) with S an iterable of edge ids; irrelevant ids are ignored."""
    return profile.value(i, edges)


# --------------------------------------------------------------------------
# constructors


def additive_profile(inst: MultigraphInstance, weights: Mapping[int, Mapping[int, int]]) -> ValuationProfile:
    """``weights[i][e]`` for real relevant edges; missing entries are 0."""
    vertices = []
    for i in range(inst.n):
        rel = inst.relevant_real(i)
        w_i = dict(weights.get(i, {}))
        for e in w_i:
            if e not in rel:
                raise ValuationError(f"vertex {i}: edge {e} is not a real relevant edge")
        vertices.append(VertexValuation(rel, weights=[w_i.get(e, 0) for e in rel]))
    return ValuationProfile(inst, vertices, ADDITIVE)


def _close_table(deg: int, given: Mapping[int, int]) -> list[int]:
    table = [0] * (1 << deg)
    for s in range(1, 1 << deg):
        if s in given:
            table[s] = given[s]
        else:
            best = 0
            rest = s
            while rest:
                low = rest & -rest
                best = max(best, table[s ^ low])
                rest ^= low
            table[s] = best
    return table


def table_vertex(inst: MultigraphInstance, i: int, entries: Mapping[frozenset, int]) -> VertexValuation:
    """Table valuation from explicit sets; missing sets take the max over
    their immediate subsets, and the empty set is always 0."""
    rel = inst.relevant_real(i)
    local = {e: k for k, e in enumerate(rel)}
    given = {}
    for s, v in entries.items():
        if v < 0:
            raise ValuationError(f"vertex {i}: negative value {v}")
        mask = 0
        for e in s:
            if e not in local:
                raise ValuationError(f"vertex {i}: edge {e} is not a real relevant edge")
            mask |= 1 << local[e]
        if mask == 0:
            if v != 0:
                raise ValuationError(f"vertex {i}: value of the empty set must be 0")
            continue
        given[mask] = int(v)
    if len(rel) > 24:
        raise ValuationError(f"vertex {i}: degree {len(rel)} too large for a table")
    return VertexValuation(rel, table=_close_table(len(rel), given))


def table_profile(inst: MultigraphInstance, tables: Mapping[int, Mapping[frozenset, int]]) -> ValuationProfile:
    vertices = [table_vertex(inst, i, tables.get(i, {})) for i in range(inst.n)]
    return ValuationProfile(inst, vertices, TABLE)


def make_additive(inst: MultigraphInstance, seed: int, scale: int = 10) -> ValuationProfile:
    """Random additive weights in ``[0, scale]``, deterministic in seed."""
    rng = random.Random(f"efx-additive:{seed}:{scale}")
    weights = {}
    for i in range(inst.n):
        weights[i] = {e: rng.randint(0, scale) for e in inst.relevant_real(i)}
    return additive_profile(inst, weights)


def make_seeded_monotone(inst: MultigraphInstance, seed: int, scale: int = 10, cap: int = AUDIT_CAP) -> ValuationProfile:
    """Random general monotone tables.

    Subsets are visited in increasing bitmask order, which lists every subset
    before its supersets; each value is the max over covered subsets plus a
    fresh increment in ``[0, scale]``.
    """
    vertices = []
    for i in range(inst.n):
        rel = inst.relevant_real(i)
        if len(rel) > cap:
            raise ValuationError(f"vertex {i} has degree {len(rel)} above the cap {cap}")
        rng = random.Random(f"efx-monotone:{seed}:{scale}:{i}")
        table = [0] * (1 << len(rel))
        for s in range(1, len(table)):
            best = 0
            rest = s
            while rest:
                low = rest & -rest
                best = max(best, table[s ^ low])
                rest ^= low
            table[s] = best + rng.randint(0, scale)
        vertices.append(VertexValuation(rel, table=table, kind=SEEDED))
    return ValuationProfile(inst, vertices, SEEDED)


# --------------------------------------------------------------------------
# audit


@dataclass
class MonotoneViolation:
    vertex: int
    subset: tuple[int, ...]
    superset: tuple[int, ...]
    subset_value: int
    superset_value: int


@dataclass
class MonotoneAudit:
    violations: list[MonotoneViolation] = field(default_factory=list)
    sampled: bool = False

    @property
    def ok(self) -> bool:
        return not self.violations


def _edges_of(vv: VertexValuation, local: int) -> tuple[int, ...]:
    return tuple(e for k, e in enumerate(vv.edges) if local >> k & 1)


def audit_monotone(profile: ValuationProfile, inst: MultigraphInstance | None = None,
                   cap: int = AUDIT_CAP, samples: int = 4096, seed: int = 0) -> MonotoneAudit:
    """Check normalization and monotonicity over cover relations.

    Vertices with more than ``cap`` relevant edges get a random sample of
    covers instead and the result is flagged as ``sampled``.
    """
    audit = MonotoneAudit()
    rng = random.Random(seed)
    for i, vv in enumerate(profile.vertices):
        if vv.value_local(0) != 0:
            audit.violations.append(MonotoneViolation(i, (), (), 0, vv.value_local(0)))
        d = vv.degree
        if d <= cap:
            supersets = range(1, 1 << d)
        else:
            audit.sampled = True
            supersets = [rng.randrange(1, 1 << d) for _ in range(samples)]
        for t in supersets:
            vt = vv.value_local(t)
            rest = t
            while rest:
                low = rest & -rest
                rest ^= low
                s = t ^ low
                vs = vv.value_local(s)
                if vs > vt:
                    audit.violations.append(
                        MonotoneViolation(i, _edges_of(vv, s), _edges_of(vv, t), vs, vt)
                    )
    return audit


# --------------------------------------------------------------------------
# text format

VALUATION_HEADER = "efx-valuation v1"


def format_valuation(profile: ValuationProfile) -> str:
    lines = [VALUATION_HEADER]
    for i, vv in enumerate(profile.vertices):
        if vv.weights is not None:
            items = " ".join(f"{e}={w}" for e, w in zip(vv.edges, vv.weights))
            lines.append(f"additive {i} {items}".rstrip())
            continue
        lines.append(f"table {i}")
        table = vv.table
        for s in range(1, len(table)):
            implied = 0
            rest = s
            while rest:
                low = rest & -rest
                implied = max(implied, table[s ^ low])
                rest ^= low
            if table[s] != implied:
                lines.append(f"set {','.join(map(str, _edges_of(vv, s)))} = {table[s]}")
    return "\n".join(lines) + "\n"


def parse_valuation(text: str, inst: MultigraphInstance) -> ValuationProfile:
    lines = text.splitlines()
    body = [(k + 1, ln.strip()) for k, ln in enumerate(lines)]
    body = [(k, ln) for k, ln in body if ln and not ln.startswith("#")]
    if not body or body[0][1] != VALUATION_HEADER:
        raise FormatError(f"expected header {VALUATION_HEADER!r}", body[0][0] if body else 1)
    additive: dict[int, dict[int, int]] = {}
    tables: dict[int, dict[frozenset, int]] = {}
    current = None
    for lineno, ln in body[1:]:
        parts = ln.split()
        try:
            if parts[0] == "additive":
                v = int(parts[1])
                if v in additive or v in tables:
                    raise FormatError(f"vertex {v} defined twice", lineno)
                w = {}
                for item in parts[2:]:
                    e, _, val = item.partition("=")
                    w[int(e)] = int(val)
                additive[v] = w
                current = None
            elif parts[0] == "table" and len(parts) == 2:
                v = int(parts[1])
                if v in additive or v in tables:
                    raise FormatError(f"vertex {v} defined twice", lineno)
                tables[v] = {}
                current = v
            elif parts[0] == "set" and current is not None:
                lhs, eq, rhs = ln[3:].partition("=")
                if not eq:
                    raise FormatError("expected 'set <edges> = <int>'", lineno)
                ids = frozenset(int(x) for x in lhs.replace(" ", "").split(",") if x)
                tables[current][ids] = int(rhs)
            else:
                raise FormatError(f"unexpected line {ln!r}", lineno)
        except (ValueError, IndexError) as exc:
            if isinstance(exc, FormatError):
                raise
            raise FormatError(f"malformed line {ln!r}", lineno) from None
    for v in list(additive) + list(tables):
        if not 0 <= v < inst.n:
            raise FormatError(f"vertex {v} outside [0, {inst.n})")
    try:
        vertices = []
        for i in range(inst.n):
            if i in tables:
                vertices.append(table_vertex(inst, i, tables[i]))
            else:
                rel = inst.relevant_real(i)
                w_i = additive.get(i, {})
                for e in w_i:
                    if e not in rel:
                        raise ValuationError(f"vertex {i}: edge {e} is not a real relevant edge")
                vertices.append(VertexValuation(rel, weights=[w_i.get(e, 0) for e in rel]))
    except ValuationError as exc:
        raise FormatError(str(exc)) from None
    kind = TABLE if tables else ADDITIVE
    return ValuationProfile(inst, vertices, kind)
