"""Ordered fan-out of independent trials.

Results always come back in submission order, so reductions over them are
identical for any worker count.  ``REJECTLAB_WORKERS`` caps the pool size.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor

import numpy as np


def resolve_workers(workers: int | None = None) -> int:
    cap = os.environ.get("REJECTLAB_WORKERS", "").strip()
    limit = int(cap) if cap.isdigit() and int(cap) > 0 else (os.cpu_count() or 1)
    if workers is None:
        return 1
    return max(1, min(int(workers), limit))


def parallel_map(fn, items, workers: int | None = None) -> list:
    items = list(items)
    w = resolve_workers(workers)
    if w == 1 or len(items) < 2:
        return [fn(it) for it in items]
    with ThreadPoolExecutor(max_workers=w) as pool:
        return list(pool.map(fn, items))


def stream(seed: int, *keys: int) -> np.random.Generator:
    """Independent generator for the key path (seed, *keys)."""
    return np.random.default_rng(np.random.SeedSequence([int(seed), *map(int, keys)]))
