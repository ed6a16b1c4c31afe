"""Backend selection for the hot loops.

The compiled module is used when it imports and ``EFX_PURE_PYTHON`` is not
set to a true value. Inputs whose values overflow int64 are always routed
to the pure-Python code.
"""

from __future__ import annotations

import os
from array import array

from efxmulti import _pykernels

_compiled = None
if os.environ.get("EFX_PURE_PYTHON", "").strip().lower() not in ("1", "true", "yes", "on"):
    try:
        from efxmulti import _ckernels as _compiled  # type: ignore[attr-defined]
    except ImportError:
        _compiled = None

BACKEND = "cython" if _compiled is not None else "python"


def _as_int64(values):
    """array('q') copy, or None when some value does not fit."""
    try:
        return array("q", values)
    except OverflowError:
        return None


def efx_cut_scan(tables: list[list[int]], k: int, backend: str | None = None) -> int:
    """Local P1 mask of the first common EFX-cut under all ``tables``, or -1."""
    flat = [v for t in tables for v in t]
    use = backend or BACKEND
    if use == "cython" and _compiled is not None:
        packed = _as_int64(flat)
        if packed is not None:
            return _compiled.efx_cut_scan(packed, len(tables), k)
    return _pykernels.efx_cut_scan(flat, len(tables), k)


def efx_enumerate(n: int, m: int, lbit: list[int], tables: list[list[int]],
                  first_owner: int = -1, limit: int = 1 << 62,
                  backend: str | None = None) -> tuple[list[tuple[int, ...]], int]:
    offsets, flat = [], []
    for t in tables:
        offsets.append(len(flat))
        flat.extend(t)
    use = backend or BACKEND
    if use == "cython" and _compiled is not None:
        packed = _as_int64(flat)
        if packed is not None:
            return _compiled.efx_enumerate(n, m, array("q", lbit), packed,
                                           array("q", offsets), first_owner, limit)
    return _pykernels.efx_enumerate(n, m, lbit, flat, offsets, first_owner, limit)


def available_backends() -> list[str]:
    return ["python"] + (["cython"] if _compiled is not None else [])
