# cython: language_level=3, boundscheck=False, wraparound=False
"""Compiled kernels. Mirrors _pykernels; values must fit in int64."""

from libc.stdlib cimport malloc, calloc, free


def efx_cut_scan(long long[:] tables, int ntables, int k):
    cdef long long size = 1 << k
    cdef long long full = size - 1
    cdef long long x, p1, p2, rest, low, a, b, base
    cdef int t, r
    cdef bint ok
    for x in range(1 << (k - 1)):
        p1 = 1
        for t in range(1, k):
            if (x >> (k - 1 - t)) & 1:
                p1 |= 1 << t
        p2 = full ^ p1
        if p2 == 0:
            continue
        ok = True
        for r in range(ntables):
            base = r * size
            a = tables[base + p1]
            b = tables[base + p2]
            rest = p2
            while rest and ok:
                low = rest & -rest
                if a < tables[base + (p2 ^ low)]:
                    ok = False
                rest ^= low
            rest = p1
            while rest and ok:
                low = rest & -rest
                if b < tables[base + (p1 ^ low)]:
                    ok = False
                rest ^= low
            if not ok:
                break
        if ok:
            return p1
    return -1


cdef bint _is_efx(int n, long long *local, int *irr, long long[:] tables, long long[:] offsets):
    cdef int i, j
    cdef long long base, vi, w, rest, low
    for i in range(n):
        base = offsets[i]
        vi = tables[base + local[i * n + i]]
        for j in range(n):
            if j == i:
                continue
            w = local[i * n + j]
            if irr[i * n + j]:
                if vi < tables[base + w]:
                    return False
                continue
            rest = w
            while rest:
                low = rest & -rest
                if vi < tables[base + (w ^ low)]:
                    return False
                rest ^= low
    return True


def efx_enumerate(int n, int m, long long[:] lbit, long long[:] tables,
                  long long[:] offsets, int first_owner, long long limit):
    if n == 0:
        return [], 0
    cdef int *owner = <int *> calloc(m + 1, sizeof(int))
    cdef long long *local = <long long *> calloc(n * n, sizeof(long long))
    cdef int *irr = <int *> calloc(n * n, sizeof(int))
    cdef int e, f, i, o, old, new, lo
    cdef long long b, count = 0
    found = []
    try:
        if first_owner >= 0 and m:
            owner[0] = first_owner
        for e in range(m):
            o = owner[e]
            for i in range(n):
                b = lbit[i * m + e]
                if b >= 0:
                    local[i * n + o] ^= (<long long> 1) << b
                else:
                    irr[i * n + o] += 1
        lo = 1 if (first_owner >= 0 and m) else 0
        while True:
            if _is_efx(n, local, irr, tables, offsets):
                count += 1
                if len(found) < limit:
                    found.append(tuple([owner[f] for f in range(m)]))
            e = m - 1
            while e >= lo and owner[e] == n - 1:
                e -= 1
            if e < lo:
                break
            for f in range(e, m):
                old = owner[f]
                new = old + 1 if f == e else 0
                owner[f] = new
                for i in range(n):
                    b = lbit[i * m + f]
                    if b >= 0:
                        local[i * n + old] ^= (<long long> 1) << b
                        local[i * n + new] ^= (<long long> 1) << b
                    else:
                        irr[i * n + old] -= 1
                        irr[i * n + new] += 1
    finally:
        free(owner)
        free(local)
        free(irr)
    return found, count
