"""Stage-by-stage pipeline record and its line-oriented text format."""

from __future__ import annotations

from dataclasses import dataclass, field

from efxmulti.cuts import Bundle, BundleTable, PairPartition
from efxmulti.errors import FormatError

TRACE_HEADER = "efx-trace v1"


def _ids(xs) -> str:
    return ",".join(map(str, xs)) if xs else "-"


def _parse_ids(tok: str, lineno: int) -> tuple[int, ...]:
    if tok == "-":
        return ()
    try:
        return tuple(int(x) for x in tok.split(","))
    except ValueError:
        raise FormatError(f"bad id list {tok!r}", lineno) from None


@dataclass
class StageSnapshot:
    name: str
    table: BundleTable
    holdings: list[tuple[int, ...]]
    parked: list[tuple[int, ...]]
    properties: list[tuple[str, bool, str]] = field(default_factory=list)
    parks: list[tuple[int, int, str]] = field(default_factory=list)
    stats: dict[str, int] = field(default_factory=dict)

    def edges_of(self, v: int) -> tuple[int, ...]:
        out = []
        for b in self.holdings[v] + self.parked[v]:
            out.extend(self.table.bundles[b].edges)
        return tuple(sorted(out))

    def unallocated(self) -> tuple[int, ...]:
        held = {b for hs in self.holdings for b in hs} | {b for ps in self.parked for b in ps}
        return tuple(b for b in self.table.bundles if b not in held)


@dataclass
class PipelineTrace:
    regime: str = ""
    n: int = 0
    notes: list[str] = field(default_factory=list)
    stages: list[StageSnapshot] = field(default_factory=list)
    final: list[tuple[int, ...]] | None = None

    def stage(self, name: str) -> StageSnapshot | None:
        for s in self.stages:
            if s.name == name:
                return s
        return None

    # ---------------------------------------------------------------- write

    def to_text(self) -> str:
        out = [TRACE_HEADER, f"regime {self.regime}", f"n {self.n}"]
        out += [f"note {x}" for x in self.notes]
        for st in self.stages:
            out.append(f"stage {st.name}")
            for p, part in st.table.partitions.items():
                cutter = "-" if part.cutter is None else str(part.cutter)
                out.append(f"table {p[0]} {p[1]} {part.kind} {cutter} {_ids(part.bundles)}")
            for b in st.table.bundles.values():
                out.append(f"bundle {b.id} {b.pair[0]} {b.pair[1]} {_ids(b.edges)}")
            for v in range(len(st.holdings)):
                edges = []
                for b in st.holdings[v]:
                    edges.extend(st.table.bundles[b].edges)
                out.append(f"holding {v} {_ids(st.holdings[v])} : {_ids(sorted(edges))}")
            for v in range(len(st.parked)):
                if st.parked[v]:
                    out.append(f"parked {v} {_ids(st.parked[v])}")
            out.append(f"unallocated {_ids(st.unallocated())}")
            for name, ok, wit in st.properties:
                out.append(f"property {name} {'pass' if ok else 'fail'} {wit}".rstrip())
            for bid, k, branch in st.parks:
                out.append(f"park {bid} {k} {branch}")
            for key in sorted(st.stats):
                out.append(f"stat {key} {st.stats[key]}")
            out.append("endstage")
        if self.final is not None:
            out.append("final")
            for v, edges in enumerate(self.final):
                out.append(f"vertex {v} : {_ids(edges)}")
            out.append("endfinal")
        return "\n".join(out) + "\n"

    # ---------------------------------------------------------------- read

    @classmethod
    def from_text(cls, text: str) -> "PipelineTrace":
        lines = text.splitlines()
        if not lines or lines[0].strip() != TRACE_HEADER:
            raise FormatError(f"expected header {TRACE_HEADER!r}", 1)
        tr = cls()
        cur = None
        parts: dict = {}
        bundles: dict = {}
        in_final = False
        final_seen = False
        for lineno, raw in enumerate(lines[1:], start=2):
            ln = raw.strip()
            if not ln:
                continue
            tok = ln.split()
            key = tok[0]
            try:
                if in_final:
                    if key == "vertex":
                        v = int(tok[1])
                        if tok[2] != ":" or v != len(tr.final):
                            raise FormatError("bad final vertex line", lineno)
                        tr.final.append(_parse_ids(tok[3], lineno))
                    elif key == "endfinal":
                        in_final, final_seen = False, True
                    else:
                        raise FormatError(f"unexpected {key!r} in final block", lineno)
                elif cur is None:
                    if key == "regime":
                        tr.regime = tok[1]
                    elif key == "n":
                        tr.n = int(tok[1])
                    elif key == "note":
                        tr.notes.append(ln[5:])
                    elif key == "stage":
                        cur = {"name": tok[1], "holdings": {}, "parked": {}, "props": [],
                               "parks": [], "stats": {}}
                        parts, bundles = {}, {}
                    elif key == "final":
                        tr.final = []
                        in_final = True
                    else:
                        raise FormatError(f"unexpected {key!r}", lineno)
                else:
                    if key == "table":
                        pair = (int(tok[1]), int(tok[2]))
                        cutter = None if tok[4] == "-" else int(tok[4])
                        parts[pair] = PairPartition(pair, tok[3], _parse_ids(tok[5], lineno), cutter)
                    elif key == "bundle":
                        bid = int(tok[1])
                        bundles[bid] = Bundle(bid, (int(tok[2]), int(tok[3])), _parse_ids(tok[4], lineno))
                    elif key == "holding":
                        if tok[3] != ":":
                            raise FormatError("bad holding line", lineno)
                        cur["holdings"][int(tok[1])] = (_parse_ids(tok[2], lineno), _parse_ids(tok[4], lineno))
                    elif key == "parked":
                        cur["parked"][int(tok[1])] = _parse_ids(tok[2], lineno)
                    elif key == "unallocated":
                        cur["unallocated"] = _parse_ids(tok[1], lineno)
                    elif key == "property":
                        if tok[2] not in ("pass", "fail"):
                            raise FormatError("property result must be pass or fail", lineno)
                        cur["props"].append((tok[1], tok[2] == "pass", " ".join(tok[3:])))
                    elif key == "park":
                        cur["parks"].append((int(tok[1]), int(tok[2]), tok[3]))
                    elif key == "stat":
                        cur["stats"][tok[1]] = int(tok[2])
                    elif key == "endstage":
                        tr.stages.append(_close_stage(cur, parts, bundles, tr.n, lineno))
                        cur = None
                    else:
                        raise FormatError(f"unexpected {key!r} inside stage", lineno)
            except (IndexError, ValueError) as exc:
                if isinstance(exc, FormatError):
                    raise
                raise FormatError(f"malformed line {ln!r}", lineno) from None
        if cur is not None:
            raise FormatError(f"stage {cur['name']!r} is not closed", len(lines))
        if in_final or (tr.final is not None and not final_seen):
            raise FormatError("final block is not closed", len(lines))
        return tr


def _close_stage(cur, parts, bundles, n, lineno) -> StageSnapshot:
    for p, part in parts.items():
        for b in part.bundles:
            if b not in bundles or bundles[b].pair != p:
                raise FormatError(f"table row for {p} names unknown bundle {b}", lineno)
    table = BundleTable(dict(sorted(bundles.items())), parts)
    holdings, parked = [], []
    for v in range(n):
        if v not in cur["holdings"]:
            raise FormatError(f"stage {cur['name']!r} lacks a holding line for vertex {v}", lineno)
        bids, edges = cur["holdings"][v]
        for b in bids:
            if b not in bundles:
                raise FormatError(f"vertex {v} holds unknown bundle {b}", lineno)
        got = tuple(sorted(e for b in bids for e in bundles[b].edges))
        if got != tuple(sorted(edges)):
            raise FormatError(f"vertex {v}: listed edges disagree with its bundles", lineno)
        holdings.append(bids)
        parked.append(cur["parked"].get(v, ()))
    snap = StageSnapshot(cur["name"], table, holdings, parked, cur["props"], cur["parks"], cur["stats"])
    if "unallocated" in cur and tuple(cur["unallocated"]) != snap.unallocated():
        raise FormatError(f"stage {cur['name']!r}: unallocated list is inconsistent", lineno)
    return snap
