"""Compare the compiled and pure-Python kernels.

    python benchmarks/bench_kernels.py [--repeat 3]

Times the EFX-cut scan on pair classes of size 12 (where a cut is usually
found early, so packing the value table dominates), an exhaustive scan over
a 16-edge class, and the brute-force EFX enumeration on a small instance, once per available backend, and checks
that both backends return identical results.
"""

import argparse
import time

from efxmulti import kernels
from efxmulti.cuts import _dense
from efxmulti.instance import build_instance, generate
from efxmulti.valuation import make_seeded_monotone
from efxmulti.verify import _kernel_inputs


def bench_cut(backend, repeat):
    inst = build_instance(2, [(0, 1)] * 12)
    results, best = [], float("inf")
    tables = []
    for seed in range(20):
        prof = make_seeded_monotone(inst, seed, scale=5)
        tables.append([_dense(prof, 0, inst.pair_class(0, 1)), _dense(prof, 1, inst.pair_class(0, 1))])
    for _ in range(repeat):
        t = time.perf_counter()
        results = [kernels.efx_cut_scan(tb, 12, backend=backend) for tb in tables]
        best = min(best, time.perf_counter() - t)
    return best, results


def bench_full_scan(backend, repeat):
    # A strictly decreasing table admits no EFX-cut, so every bipartition is visited.
    k = 16
    table = [k - bin(s).count("1") for s in range(1 << k)]
    best, res = float("inf"), None
    for _ in range(repeat):
        t = time.perf_counter()
        res = kernels.efx_cut_scan([table], k, backend=backend)
        best = min(best, time.perf_counter() - t)
    return best, res


def bench_enum(backend, repeat):
    inst = generate("bipartite", 5, mult=3, max_edges=8, density=0.8, seed=3)
    prof = make_seeded_monotone(inst, 3)
    lbit, tables = _kernel_inputs(prof, inst)
    best, res = float("inf"), None
    for _ in range(repeat):
        t = time.perf_counter()
        res = kernels.efx_enumerate(inst.n, inst.m, lbit, tables, backend=backend)
        best = min(best, time.perf_counter() - t)
    return best, (res[1], inst.n ** inst.m)


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    backends = kernels.available_backends()
    print(f"default backend: {kernels.BACKEND}; available: {', '.join(backends)}")
    cases = (("cut_scan", bench_cut), ("cut_full_scan", bench_full_scan),
             ("efx_enumerate", bench_enum))
    for name, fn in cases:
        timings, outputs = {}, {}
        for b in backends:
            timings[b], outputs[b] = fn(b, args.repeat)
        same = len({repr(o) for o in outputs.values()}) == 1
        row = "  ".join(f"{b}={timings[b] * 1e3:9.2f} ms" for b in backends)
        speed = ""
        if "cython" in timings and timings["cython"] > 0:
            speed = f"  speedup x{timings['python'] / timings['cython']:.1f}"
        print(f"{name:14s} {row}{speed}  identical={same}")


if __name__ == "__main__":
    main()
