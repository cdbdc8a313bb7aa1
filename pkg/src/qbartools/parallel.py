"""Deterministic fan-out helper for scan grids.

Grid points are independent; results are keyed by index so the output order
never depends on worker scheduling.  The worker count defaults to 1 (serial)
and can be overridden with the QBARTOOLS_WORKERS environment variable.
"""

from __future__ import annotations

import os

WORKERS_ENV = "QBARTOOLS_WORKERS"


def resolve_workers(explicit: int | None = None) -> int:
    if explicit is not None:
        return max(int(explicit), 1)
    env = os.environ.get(WORKERS_ENV)
    if env:
        try:
            return max(int(env), 1)
        except ValueError:
            return 1
    return 1


def indexed_map(fn, items, workers: int | None = None) -> list:
    """Apply fn to each item; results ordered by item index.

    Threads rather than processes: the work is numpy-heavy (GIL released in
    BLAS) and thread pools accept closures over simulation state.
    """
    n_workers = resolve_workers(workers)
    items = list(items)
    if n_workers <= 1 or len(items) <= 1:
        return [fn(item) for item in items]

    from concurrent.futures import ThreadPoolExecutor

    with ThreadPoolExecutor(max_workers=n_workers) as pool:
        return list(pool.map(fn, items))
