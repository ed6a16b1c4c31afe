"""Command-line front end: gen, solve, verify, oracle, sweep.

Exit codes
    0  success (solve: EFX certified; verify: all checks pass)
    1  verify: some check failed; oracle: empty EFX set
    2  solve: no applicable regime, or the forced regime does not apply
    3  solve/sweep: internal invariant breach
    4  unreadable or invalid input, infeasible generator parameters
"""

from __future__ import annotations

import argparse
import csv
import logging
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from efxmulti.errors import EfxError, FormatError, InvariantBreach, NoApplicableRegime
from efxmulti.instance import REGIMES, format_instance, generate, parse_instance
from efxmulti.pipeline import solve
from efxmulti.trace import PipelineTrace
from efxmulti.valuation import (
    audit_monotone, format_valuation, make_additive, make_seeded_monotone, parse_valuation,
)
from efxmulti.verify import audit_trace, brute_force_efx, check_allocation

log = logging.getLogger("efxmulti")

ALLOCATION_HEADER = "efx-allocation v1"
SWEEP_COLUMNS = ("family", "seed", "regime", "n", "m", "envied_after_step1",
                 "step2_rounds", "parked_bundles", "status")

EXIT_OK, EXIT_FAIL, EXIT_REGIME, EXIT_BREACH, EXIT_INPUT = 0, 1, 2, 3, 4


# --------------------------------------------------------------------------
# allocation file


def format_allocation(allocation) -> str:
    lines = [ALLOCATION_HEADER]
    for v, edges in enumerate(allocation):
        lines.append(f"vertex {v}: {' '.join(map(str, edges))}".rstrip())
    return "\n".join(lines) + "\n"


def parse_allocation(text: str) -> list[tuple[int, ...]]:
    rows = [(k + 1, ln.strip()) for k, ln in enumerate(text.splitlines())]
    rows = [(k, ln) for k, ln in rows if ln and not ln.startswith("#")]
    if not rows or rows[0][1] != ALLOCATION_HEADER:
        raise FormatError(f"expected header {ALLOCATION_HEADER!r}", rows[0][0] if rows else 1)
    out = []
    for lineno, ln in rows[1:]:
        head, colon, rest = ln.partition(":")
        parts = head.split()
        if not colon or len(parts) != 2 or parts[0] != "vertex":
            raise FormatError(f"expected 'vertex <i>: <edge ids>', got {ln!r}", lineno)
        try:
            v = int(parts[1])
            edges = tuple(sorted(int(x) for x in rest.split()))
        except ValueError:
            raise FormatError(f"non-integer id in {ln!r}", lineno) from None
        if v != len(out):
            raise FormatError(f"vertex {v} out of order", lineno)
        out.append(edges)
    return out


# --------------------------------------------------------------------------
# helpers


def _seed(args_seed: int) -> int:
    env = os.environ.get("EFX_SEED")
    if env not in (None, ""):
        try:
            return int(env)
        except ValueError:
            raise FormatError(f"EFX_SEED must be an integer, got {env!r}") from None
    return args_seed


def _read(path: str) -> str:
    try:
        return Path(path).read_text()
    except OSError as exc:
        raise FormatError(f"cannot read {path}: {exc.strerror}") from None


def _load(inst_path: str, val_path: str):
    inst = parse_instance(_read(inst_path))
    prof = parse_valuation(_read(val_path), inst)
    return inst, prof


def _valuation(inst, kind: str, seed: int, scale: int):
    if kind == "additive":
        return make_additive(inst, seed, scale)
    return make_seeded_monotone(inst, seed, scale)


def _err(msg: str) -> None:
    print(f"efxmulti: {msg}", file=sys.stderr)


# --------------------------------------------------------------------------
# commands


def cmd_gen(args) -> int:
    seed = _seed(args.seed)
    inst = generate(args.family, args.n, mult=args.mult, neighbors=args.neighbors,
                    max_edges=args.max_edges, density=args.density, seed=seed)
    prof = _valuation(inst, args.valuation, seed, args.scale)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    inst_path = out.with_name(out.name + ".inst")
    val_path = out.with_name(out.name + ".val")
    inst_path.write_text(format_instance(inst))
    val_path.write_text(format_valuation(prof))
    print(f"wrote {inst_path} {val_path}")
    return EXIT_OK


def cmd_solve(args) -> int:
    inst, prof = _load(args.instance, args.valuation)
    audit = audit_monotone(prof, inst)
    if not audit.ok:
        v = audit.violations[0]
        _err(f"valuation of vertex {v.vertex} is not monotone: {v.subset} -> {v.superset}")
        return EXIT_INPUT
    try:
        sol = solve(prof, inst, regime=args.regime)
    except NoApplicableRegime as exc:
        _err(str(exc))
        return EXIT_REGIME
    except InvariantBreach as exc:
        _err(f"invariant breach: {exc}")
        if exc.trace is not None:
            text = exc.trace.to_text()
            if args.trace:
                Path(args.trace).write_text(text)
            else:
                sys.stderr.write(text)
        return EXIT_BREACH
    if args.trace:
        Path(args.trace).write_text(sol.trace.to_text())
    text = format_allocation(sol.allocation)
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    log.info("regime %s, %s", sol.regime, sol.stats)
    return EXIT_OK


def cmd_verify(args) -> int:
    inst, prof = _load(args.instance, args.valuation)
    if args.trace:
        report = audit_trace(prof, inst, PipelineTrace.from_text(_read(args.trace)))
    else:
        report = check_allocation(prof, inst, parse_allocation(_read(args.allocation)))
    text = report.to_text()
    if args.report:
        Path(args.report).write_text(text)
        print(f"result {'pass' if report.ok else 'fail'}")
        for c in report.failures():
            print(c.line())
    else:
        sys.stdout.write(text)
    return EXIT_OK if report.ok else EXIT_FAIL


def cmd_oracle(args) -> int:
    inst, prof = _load(args.instance, args.valuation)
    res = brute_force_efx(prof, inst, cap=args.cap, workers=args.jobs, limit=args.limit)
    print(f"assignments {res.assignments}")
    print(f"efx {res.count}")
    for alloc in res.allocations[: args.show]:
        print(" | ".join(",".join(map(str, x)) or "-" for x in alloc))
    return EXIT_OK if res.count else EXIT_FAIL


def _seed_list(text: str) -> list[int]:
    out: list[int] = []
    for chunk in text.split(","):
        chunk = chunk.strip()
        if not chunk:
            continue
        if "-" in chunk:
            lo, hi = chunk.split("-", 1)
            out.extend(range(int(lo), int(hi) + 1))
        else:
            out.append(int(chunk))
    return out


def _sweep_one(job):
    family, n, seed, kw, valuation, scale = job
    inst = generate(family, n, seed=seed, **kw)
    prof = _valuation(inst, valuation, seed, scale)
    row = {"family": family, "seed": seed, "n": n, "m": inst.m}
    try:
        sol = solve(prof, inst, regime=family)
    except InvariantBreach as exc:
        row.update(regime=family, envied_after_step1="", step2_rounds="", parked_bundles="",
                   status=f"breach: {exc}")
        return row
    rep = check_allocation(prof, inst, sol.allocation)
    row.update(regime=sol.regime, envied_after_step1=sol.stats["envied_after_step1"],
               step2_rounds=sol.stats["step2_rounds"], parked_bundles=sol.stats["parked_bundles"],
               status="EFX" if rep.ok else "not-EFX")
    return row


def cmd_sweep(args) -> int:
    seeds = _seed_list(args.seeds)
    sizes = [int(x) for x in args.n_grid.split(",") if x.strip()]
    kw = {"mult": args.mult, "neighbors": args.neighbors, "max_edges": args.max_edges,
          "density": args.density}
    jobs = [(args.family, n, s, kw, args.valuation, args.scale) for n in sizes for s in seeds]
    fh = open(args.report, "w", newline="") if args.report else sys.stdout
    try:
        writer = csv.DictWriter(fh, fieldnames=SWEEP_COLUMNS, lineterminator="\n")
        writer.writeheader()
        if args.jobs > 1 and jobs:
            with ProcessPoolExecutor(max_workers=args.jobs) as pool:
                rows = pool.map(_sweep_one, jobs)
                status = _write_rows(writer, rows)
        else:
            status = _write_rows(writer, map(_sweep_one, jobs))
    finally:
        if fh is not sys.stdout:
            fh.close()
    return status


def _write_rows(writer, rows) -> int:
    total = 0
    for row in rows:
        writer.writerow(row)
        total += 1
        if row["status"] != "EFX":
            _err(f"sweep aborted: {row['family']} n={row['n']} seed={row['seed']}: {row['status']}")
            return EXIT_BREACH
    print(f"# {total} instances, all EFX", file=sys.stderr)
    return EXIT_OK


# --------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="efxmulti", description=__doc__.splitlines()[0])
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    def gen_opts(p):
        p.add_argument("--mult", type=int, default=3, help="max real edges per pair")
        p.add_argument("--neighbors", type=int, default=None, help="bounded family: neighbor cap")
        p.add_argument("--max-edges", type=int, default=None)
        p.add_argument("--density", type=float, default=0.5)
        p.add_argument("--valuation", choices=("additive", "monotone"), default="monotone")
        p.add_argument("--scale", type=int, default=10)

    g = sub.add_parser("gen", help="write a seeded instance and valuation")
    g.add_argument("family", choices=REGIMES)
    g.add_argument("--n", type=int, required=True)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--out", default="instance", help="output prefix (.inst and .val appended)")
    gen_opts(g)
    g.set_defaults(func=cmd_gen)

    s = sub.add_parser("solve", help="compute a complete EFX allocation")
    s.add_argument("instance")
    s.add_argument("valuation")
    s.add_argument("--regime", choices=REGIMES, default=None)
    s.add_argument("--trace", default=None, help="write the stage trace here")
    s.add_argument("--out", default=None, help="allocation file (default stdout)")
    s.set_defaults(func=cmd_solve)

    v = sub.add_parser("verify", help="check an allocation or audit a trace")
    v.add_argument("instance")
    v.add_argument("valuation")
    grp = v.add_mutually_exclusive_group(required=True)
    grp.add_argument("--allocation")
    grp.add_argument("--trace")
    v.add_argument("--report", default=None)
    v.set_defaults(func=cmd_verify)

    o = sub.add_parser("oracle", help="enumerate all EFX allocations")
    o.add_argument("instance")
    o.add_argument("valuation")
    o.add_argument("--cap", type=int, default=10**7)
    o.add_argument("--jobs", type=int, default=1)
    o.add_argument("--limit", type=int, default=1000)
    o.add_argument("--show", type=int, default=0)
    o.set_defaults(func=cmd_oracle)

    w = sub.add_parser("sweep", help="solve a grid of seeded instances into a CSV")
    w.add_argument("family", choices=REGIMES)
    w.add_argument("--n-grid", default="6")
    w.add_argument("--seeds", default="0-9", help="e.g. 0-99 or 1,5,7; empty for none")
    w.add_argument("--report", default=None)
    w.add_argument("--jobs", type=int, default=1)
    gen_opts(w)
    w.set_defaults(func=cmd_sweep)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except (FormatError, EfxError, ValueError) as exc:
        _err(str(exc))
        return EXIT_INPUT


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
