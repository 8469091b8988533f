"""Replica fan-out over a process pool, merged deterministically."""

from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor


def pmap(fn, items, workers: int | None = None) -> list:
    """Map ``fn`` over ``items`` preserving order; processes when useful."""
    items = list(items)
    if workers is None:
        workers = os.cpu_count() or 1
    if workers <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    chunksize = max(1, len(items) // (workers * 8))
    with ProcessPoolExecutor(max_workers=workers) as ex:
        return list(ex.map(fn, items, chunksize=chunksize))
