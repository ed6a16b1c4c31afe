"""Pure-Python reference kernels. Same signatures as the compiled module.

Tables are flat integer sequences; ``offsets[i]`` is where vertex ``i``'s
dense table starts. ``lbit[i * m + e]`` is edge ``e``'s local bit for
vertex ``i`` or -1 when the edge is irrelevant to ``i``.
"""


def efx_cut_scan(tables, ntables, k):
    """First local P1 mask (bit 0 always set, P2 nonempty) that is an
    EFX-cut under every table, scanning membership vectors in lexicographic
    order. Returns -1 when none exists."""
    size = 1 << k
    full = size - 1
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


def _is_efx(n, local, irr, tables, offsets):
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


def efx_enumerate(n, m, lbit, tables, offsets, first_owner, limit):
    """All owner vectors (edge -> vertex) that form EFX allocations.

    Assignments are visited in lexicographic order of the owner vector;
    with ``first_owner >= 0`` edge 0 is pinned to that vertex. At most
    ``limit`` results are kept; the second return value is the total count.
    """
    if n == 0:
        return [], 0
    owner = [0] * m
    if first_owner >= 0 and m:
        owner[0] = first_owner
    local = [0] * (n * n)
    irr = [0] * (n * n)
    for e in range(m):
        o = owner[e]
        for i in range(n):
            b = lbit[i * m + e]
            if b >= 0:
                local[i * n + o] ^= 1 << b
            else:
                irr[i * n + o] += 1
    lo = 1 if (first_owner >= 0 and m) else 0
    found = []
    count = 0
    while True:
        if _is_efx(n, local, irr, tables, offsets):
            count += 1
            if len(found) < limit:
                found.append(tuple(owner))
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
                    local[i * n + old] ^= 1 << b
                    local[i * n + new] ^= 1 << b
                else:
                    irr[i * n + old] -= 1
                    irr[i * n + new] += 1
    return found, count
