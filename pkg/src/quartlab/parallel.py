"""Ordered chunk evaluation on a caller-owned worker pool.

Work is always split into the same chunks regardless of the thread count and
results are combined in chunk order, so output does not depend on scheduling.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor


def chunk_bounds(n: int, size: int) -> list[tuple[int, int]]:
    return [(i, min(i + size, n)) for i in range(0, n, size)]


def ordered_map(fn, items, threads: int = 1) -> list:
    items = list(items)
    if threads <= 1 or len(items) <= 1:
        return [fn(it) for it in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


def ordered_fsum(values) -> float:
    """Exactly rounded sum, independent of the order of ``values``."""
    return math.fsum(values)
