"""Multigraph instances: construction, dummy edges, regime detection, generators.

Vertices are agents and edges are goods. Every pair class (the edges shared
by two vertices) is padded with a zero-value dummy edge when it holds a
single real edge, so that every pair can be split into two nonempty bundles.
"""

from __future__ import annotations

import math
import random
from collections import deque
from dataclasses import dataclass
from typing import Iterable, Sequence

from efxmulti.errors import FormatError, InstanceError

BIPARTITE = "bipartite"
BOUNDED = "bounded"
GIRTH6 = "girth6"

REGIMES = (BIPARTITE, BOUNDED, GIRTH6)
# Bipartite > Girth6 > Bounded: cheapest bundle table first.
REGIME_PRIORITY = (BIPARTITE, GIRTH6, BOUNDED)


@dataclass(frozen=True)
class Edge:
    id: int
    a: int
    b: int
    is_dummy: bool = False

    @property
    def pair(self) -> tuple[int, int]:
        return (self.a, self.b) if self.a < self.b else (self.b, self.a)


class MultigraphInstance:
    """An immutable multigraph with materialized dummy edges.

    Real edges keep their input order as ids ``0..m-1``; dummy edges are
    appended after them. ``pair_classes`` maps each sorted vertex pair to the
    ordered tuple of its edge ids, dummies included.
    """

    def __init__(self, n: int, edges: Sequence[Edge]):
        self.n = n
        self.edges: tuple[Edge, ...] = tuple(edges)
        classes: dict[tuple[int, int], list[int]] = {}
        for e in self.edges:
            classes.setdefault(e.pair, []).append(e.id)
        self.pair_classes: dict[tuple[int, int], tuple[int, ...]] = {
            p: tuple(sorted(ids)) for p, ids in sorted(classes.items())
        }
        self.pairs: tuple[tuple[int, int], ...] = tuple(self.pair_classes)
        nbrs: list[set[int]] = [set() for _ in range(n)]
        for a, b in self.pairs:
            nbrs[a].add(b)
            nbrs[b].add(a)
        self._neighbors = tuple(tuple(sorted(s)) for s in nbrs)
        self._pair_mask = {
            p: sum(1 << e for e in ids) for p, ids in self.pair_classes.items()
        }
        relevant = [0] * n
        relevant_real = [0] * n
        for e in self.edges:
            for v in (e.a, e.b):
                relevant[v] |= 1 << e.id
                if not e.is_dummy:
                    relevant_real[v] |= 1 << e.id
        self._relevant = tuple(relevant)
        self._relevant_real = tuple(relevant_real)
        self.dummy_mask = sum(1 << e.id for e in self.edges if e.is_dummy)
        self.real_edges = tuple(e.id for e in self.edges if not e.is_dummy)
        deg = [0] * n
        for e in self.edges:
            if not e.is_dummy:
                deg[e.a] += 1
                deg[e.b] += 1
        self.real_degree = tuple(deg)
        # Recorded only; the pipeline handles them through their dummy edge.
        self.degree_one = tuple(v for v in range(n) if deg[v] == 1)

    @property
    def m(self) -> int:
        """Number of real (non-dummy) edges."""
        return len(self.real_edges)

    def neighbors(self, v: int) -> tuple[int, ...]:
        return self._neighbors[v]

    def edge(self, eid: int) -> Edge:
        return self.edges[eid]

    def pair_class(self, i: int, j: int) -> tuple[int, ...]:
        return self.pair_classes[(i, j) if i < j else (j, i)]

    def pair_mask(self, i: int, j: int) -> int:
        return self._pair_mask[(i, j) if i < j else (j, i)]

    def relevant_mask(self, v: int) -> int:
        return self._relevant[v]

    def relevant_real(self, v: int) -> tuple[int, ...]:
        mask = self._relevant_real[v]
        return tuple(e for e in self.real_edges if mask >> e & 1)

    def real_edge_pairs(self) -> list[tuple[int, int]]:
        return [(e.a, e.b) for e in self.edges if not e.is_dummy]

    def max_real_multiplicity(self) -> int:
        best = 0
        for ids in self.pair_classes.values():
            best = max(best, sum(1 for e in ids if not self.edges[e].is_dummy))
        return best

    def __eq__(self, other):
        return (
            isinstance(other, MultigraphInstance)
            and self.n == other.n
            and self.edges == other.edges
        )

    def __hash__(self):
        return hash((self.n, self.edges))

    def __repr__(self):
        return f"MultigraphInstance(n={self.n}, m={self.m}, pairs={len(self.pairs)})"


def build_instance(n: int, raw_edges: Iterable[Sequence[int]]) -> MultigraphInstance:
    """Build an instance from endpoint pairs, inserting dummy edges.

    >>> inst = build_instance(2, [(0, 1)])
    >>> inst.pair_classes
    {(0, 1): (0, 1)}
    >>> inst.edge(1).is_dummy
    True
    """
    if n < 0:
        raise InstanceError(f"vertex count must be nonnegative, got {n}")
    edges = []
    for idx, pair in enumerate(raw_edges):
        a, b = int(pair[0]), int(pair[1])
        if a == b:
            raise InstanceError(f"edge {idx} is a self-loop on vertex {a}")
        for v in (a, b):
            if not 0 <= v < n:
                raise InstanceError(f"edge {idx} endpoint {v} outside [0, {n})")
        edges.append(Edge(idx, a, b))
    counts: dict[tuple[int, int], int] = {}
    for e in edges:
        counts[e.pair] = counts.get(e.pair, 0) + 1
    next_id = len(edges)
    for (a, b), c in sorted(counts.items()):
        if c == 1:
            edges.append(Edge(next_id, a, b, True))
            next_id += 1
    return MultigraphInstance(n, edges)


# --------------------------------------------------------------------------
# regimes


@dataclass(frozen=True)
class RegimeReport:
    is_bipartite: bool
    coloring: tuple[int, ...] | None
    max_neighbors: int
    neighbor_bound: int
    neighbor_bound_ok: bool
    simple_girth: float
    girth_ok: bool
    applicable_regimes: tuple[str, ...]


def two_coloring(n: int, neighbors) -> tuple[int, ...] | None:
    """BFS 2-coloring; the smallest vertex of each component gets color 0."""
    color = [-1] * n
    for s in range(n):
        if color[s] != -1:
            continue
        color[s] = 0
        queue = deque([s])
        while queue:
            u = queue.popleft()
            for w in neighbors(u):
                if color[w] == -1:
                    color[w] = 1 - color[u]
                    queue.append(w)
                elif color[w] == color[u]:
                    return None
    return tuple(color)


def simple_girth(n: int, neighbors) -> float:
    """Length of the shortest cycle of a simple graph, ``math.inf`` if acyclic."""
    best = math.inf
    for root in range(n):
        dist = [-1] * n
        parent = [-1] * n
        dist[root] = 0
        queue = deque([root])
        while queue:
            u = queue.popleft()
            if 2 * dist[u] >= best:
                break
            for w in neighbors(u):
                if dist[w] == -1:
                    dist[w] = dist[u] + 1
                    parent[w] = u
                    queue.append(w)
                elif parent[u] != w:
                    best = min(best, dist[u] + dist[w] + 1)
    return best


def neighbor_bound(n: int, max_multiplicity: int) -> int:
    """Largest neighbor count admitted by the bounded regime."""
    if max_multiplicity <= 2:
        return n // 4
    return -(-n // 4) - 1


def detect_regimes(inst: MultigraphInstance) -> RegimeReport:
    coloring = two_coloring(inst.n, inst.neighbors)
    max_nb = max((len(inst.neighbors(v)) for v in range(inst.n)), default=0)
    bound = neighbor_bound(inst.n, inst.max_real_multiplicity())
    girth = simple_girth(inst.n, inst.neighbors)
    applicable = []
    if coloring is not None:
        applicable.append(BIPARTITE)
    if max_nb <= bound:
        applicable.append(BOUNDED)
    if girth >= 6:
        applicable.append(GIRTH6)
    return RegimeReport(
        is_bipartite=coloring is not None,
        coloring=coloring,
        max_neighbors=max_nb,
        neighbor_bound=bound,
        neighbor_bound_ok=max_nb <= bound,
        simple_girth=girth,
        girth_ok=girth >= 6,
        applicable_regimes=tuple(applicable),
    )


# --------------------------------------------------------------------------
# generators


def _bfs_dist(adj: list[set[int]], s: int, t: int) -> float:
    if s == t:
        return 0
    dist = {s: 0}
    queue = deque([s])
    while queue:
        u = queue.popleft()
        for w in adj[u]:
            if w not in dist:
                dist[w] = dist[u] + 1
                if w == t:
                    return dist[w]
                queue.append(w)
    return math.inf


def _bipartite_pairs(n, rng, density):
    if n < 2:
        return []
    side_a = set(rng.sample(range(n), rng.randint(1, n - 1)))
    return [
        (a, b)
        for a in range(n)
        for b in range(a + 1, n)
        if (a in side_a) != (b in side_a) and rng.random() < density
    ]


def _bounded_pairs(n, rng, density, neighbors):
    all_pairs = [(a, b) for a in range(n) for b in range(a + 1, n)]
    rng.shuffle(all_pairs)
    deg = [0] * n
    chosen = []
    for a, b in all_pairs:
        if deg[a] < neighbors and deg[b] < neighbors and rng.random() < density:
            chosen.append((a, b))
            deg[a] += 1
            deg[b] += 1
    return sorted(chosen)


def _girth6_pairs(n, rng, density, cycle):
    order = list(range(n))
    rng.shuffle(order)
    adj: list[set[int]] = [set() for _ in range(n)]
    chosen = set()

    def add(a, b):
        chosen.add((min(a, b), max(a, b)))
        adj[a].add(b)
        adj[b].add(a)

    start = 1
    if cycle and n >= 6:
        length = rng.randint(6, n)
        for k in range(length):
            add(order[k], order[(k + 1) % length])
        start = length
    for k in range(start, n):
        if k > 0 and rng.random() < max(density, 0.5):
            add(order[k], order[rng.randrange(k)])
    extra = [(a, b) for a in range(n) for b in range(a + 1, n)]
    rng.shuffle(extra)
    for a, b in extra:
        if (a, b) not in chosen and rng.random() < density and _bfs_dist(adj, a, b) >= 5:
            add(a, b)
    return sorted(chosen)


def generate(
    family: str,
    n: int,
    *,
    mult: int = 3,
    neighbors: int | None = None,
    max_edges: int | None = None,
    density: float = 0.5,
    cycle: bool = True,
    seed: int = 0,
) -> MultigraphInstance:
    """Seeded random instance guaranteed to lie in ``family``'s regime.

    ``mult`` caps the real multiplicity of every pair class and ``max_edges``
    caps the total number of real edges (multiplicities are trimmed first,
    then whole pairs are dropped; every family is closed under subgraphs).
    """
    if n < 1:
        raise InstanceError("n must be at least 1")
    if mult < 1:
        raise InstanceError("mult must be at least 1")
    rng = random.Random(f"efx-gen:{family}:{n}:{mult}:{neighbors}:{max_edges}:{seed}")
    if family == BIPARTITE:
        pairs = _bipartite_pairs(n, rng, density)
    elif family == BOUNDED:
        bound = neighbor_bound(n, mult)
        if neighbors is None:
            neighbors = bound
        if neighbors > bound:
            rule = "floor(n/4)" if mult <= 2 else "ceil(n/4)-1"
            raise InstanceError(
                f"bounded family: {neighbors} neighbors exceeds bound {rule} = {bound} for n={n}"
            )
        pairs = _bounded_pairs(n, rng, density, neighbors)
    elif family == GIRTH6:
        pairs = _girth6_pairs(n, rng, density, cycle)
    else:
        raise InstanceError(f"unknown family {family!r}")

    multiplicity = {p: rng.randint(1, mult) for p in pairs}
    if max_edges is not None:
        while sum(multiplicity.values()) > max_edges:
            heavy = [p for p, c in multiplicity.items() if c > 1]
            if heavy:
                multiplicity[rng.choice(heavy)] -= 1
            else:
                del multiplicity[rng.choice(sorted(multiplicity))]
    raw = [p for p in sorted(multiplicity) for _ in range(multiplicity[p])]
    inst = build_instance(n, raw)
    report = detect_regimes(inst)
    if family not in report.applicable_regimes:  # pragma: no cover - generator bug
        raise AssertionError(f"generated instance is not in family {family}: {report}")
    return inst


# --------------------------------------------------------------------------
# text format

INSTANCE_HEADER = "efx-instance v1"


def format_instance(inst: MultigraphInstance) -> str:
    lines = [INSTANCE_HEADER, f"n {inst.n}"]
    lines += [f"edge {e.a} {e.b}" for e in inst.edges if not e.is_dummy]
    return "\n".join(lines) + "\n"


def parse_instance(text: str) -> MultigraphInstance:
    lines = text.splitlines()
    body = [(k + 1, ln.strip()) for k, ln in enumerate(lines)]
    body = [(k, ln) for k, ln in body if ln and not ln.startswith("#")]
    if not body or body[0][1] != INSTANCE_HEADER:
        raise FormatError(f"expected header {INSTANCE_HEADER!r}", body[0][0] if body else 1)
    if len(body) < 2:
        raise FormatError("missing 'n <int>' line", len(lines) + 1)
    n = None
    raw = []
    for lineno, ln in body[1:]:
        parts = ln.split()
        try:
            if parts[0] == "n" and len(parts) == 2 and n is None:
                n = int(parts[1])
            elif parts[0] == "edge" and len(parts) == 3 and n is not None:
                raw.append((int(parts[1]), int(parts[2])))
            else:
                raise FormatError(f"unexpected line {ln!r}", lineno)
        except ValueError as exc:
            if isinstance(exc, FormatError):
                raise
            raise FormatError(f"bad integer in {ln!r}", lineno) from None
    if n is None:
        raise FormatError("missing 'n <int>' line")
    try:
        return build_instance(n, raw)
    except InstanceError as exc:
        raise FormatError(str(exc)) from None
