"""Kernel backend selection.

The compiled extension is used when it imports; otherwise the pure-Python
kernels are.  Setting ``LABELPART_BACKEND=python`` forces the fallback.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from types import ModuleType

import numpy as np

from labelpart import _pykernels


def _load_compiled() -> ModuleType | None:
    try:
        from labelpart import _core
    except ImportError:
        return None
    return _core


_compiled = _load_compiled()

if os.environ.get("LABELPART_BACKEND", "").lower() == "python" or _compiled is None:
    kernels: ModuleType = _pykernels
else:
    kernels = _compiled

BACKENDS = {"python": _pykernels}
if _compiled is not None:
    BACKENDS["cython"] = _compiled


def get_kernels(name: str | None = None) -> ModuleType:
    """Return the kernel module called ``name`` (default: the active one)."""
    if name is None:
        return kernels
    try:
        return BACKENDS[name]
    except KeyError:
        raise ValueError(f"backend {name!r} unavailable; have {sorted(BACKENDS)}") from None


def run_queries(fn, n_queries: int, threads: int = 1):
    """Run ``fn(start, stop)`` over ``range(n_queries)`` in contiguous chunks.

    ``fn`` returns ``(counts, nbrs, *stats)``.  Chunks are concatenated in
    query order and integer stats are summed, so the result does not depend
    on ``threads``.
    """
    if threads <= 1 or n_queries < 2 * threads:
        return fn(0, n_queries)
    bounds = np.linspace(0, n_queries, threads + 1).astype(np.int64)
    with ThreadPoolExecutor(max_workers=threads) as pool:
        parts = list(pool.map(lambda se: fn(int(se[0]), int(se[1])), zip(bounds[:-1], bounds[1:])))
    counts = np.concatenate([p[0] for p in parts])
    nbrs = np.concatenate([p[1] for p in parts])
    stats = tuple(sum(p[k] for p in parts) for k in range(2, len(parts[0])))
    return (counts, nbrs, *stats)
