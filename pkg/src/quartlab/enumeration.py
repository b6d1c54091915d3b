"""Sums of four positive fourth powers: enumeration, gap statistics, empty-interval counters."""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field

import numpy as np

from .errors import BudgetExceeded
from .parallel import ordered_map

DEFAULT_WINDOW = 2 ** 30
DEFAULT_MAX_BITMAP = 2 ** 30
# sums are formed in int64
MAX_LIMIT = 2 ** 62


def iroot4(n: int) -> int:
    """Exact ``floor(n ** (1/4))`` for any non-negative integer."""
    if n < 0:
        raise ValueError("n must be non-negative")
    return math.isqrt(math.isqrt(n))


def iroot4_array(n: np.ndarray) -> np.ndarray:
    """Vectorised ``floor(n ** (1/4))`` for ``0 <= n < 2**62``: float seed, then integer correction."""
    n = np.asarray(n, dtype=np.int64)
    x = np.floor(np.power(n.astype(np.float64), 0.25)).astype(np.int64)
    # the seed is off by at most one in either direction below 2**62
    for _ in range(2):
        x = np.where(x ** 4 > n, x - 1, x)
        x = np.where((x + 1) ** 4 <= n, x + 1, x)
    return x


def _pair_table(xmax: int) -> np.ndarray:
    """``x3**4 + x4**4`` for ``xmax >= x3 >= x4 >= 1``, ordered by x3 then x4.

    The first ``m*(m+1)//2`` entries are exactly the pairs with ``x3 <= m``.
    """
    x3 = np.repeat(np.arange(1, xmax + 1, dtype=np.int64), np.arange(1, xmax + 1))
    x4 = np.concatenate([np.arange(1, m + 1, dtype=np.int64) for m in range(1, xmax + 1)]) if xmax else np.zeros(0, np.int64)
    return x3 ** 4 + x4 ** 4


def _mark_x1(x1: int, lo: int, hi: int, pairs: np.ndarray) -> np.ndarray:
    """Offsets (relative to ``lo``) of sums with largest part ``x1`` in ``[lo, hi)``."""
    p1 = x1 ** 4
    out = []
    for x2 in range(1, x1 + 1):
        base = p1 + x2 ** 4
        if base + 2 >= hi:
            break
        if base + 2 * x2 ** 4 < lo:
            continue
        v = base + pairs[: x2 * (x2 + 1) // 2]
        v = v[(v >= lo) & (v < hi)]
        if v.size:
            out.append(v - lo)
    if not out:
        return np.zeros(0, dtype=np.int64)
    return np.concatenate(out)


def _window_bitmap(lo: int, hi: int, threads: int = 1) -> np.ndarray:
    """Boolean membership of ``[lo, hi)`` in the set of sums of four positive fourth powers."""
    bits = np.zeros(hi - lo, dtype=bool)
    if hi <= 4:
        return bits
    xmax = iroot4(hi - 1 - 3)
    pairs = _pair_table(xmax)
    # x1 is the largest part, so x1**4 >= lo/4
    x1_lo = max(1, iroot4(max(lo // 4, 0)))
    x1s = list(range(x1_lo, xmax + 1))
    # per-x1 index sets merged by OR: the union is independent of scheduling
    for idx in ordered_map(lambda x1: _mark_x1(x1, lo, hi, pairs), x1s, threads):
        bits[idx] = True
    return bits


def iter_windows(limit: int, window: int | None = None, max_bitmap: int = DEFAULT_MAX_BITMAP,
                 threads: int = 1):
    """Yield ``(lo, bitmap)`` covering ``[0, limit]`` in increasing order."""
    limit = int(limit)
    if limit >= MAX_LIMIT:
        raise BudgetExceeded("enumeration limit", limit, MAX_LIMIT - 1)
    total = limit + 1
    if window is None:
        window = total if total <= max_bitmap else DEFAULT_WINDOW
    window = min(window, max_bitmap)
    if window <= 0:
        raise BudgetExceeded("enumeration window", total, max_bitmap)
    lo = 0
    while lo < total:
        hi = min(lo + window, total)
        yield lo, _window_bitmap(lo, hi, threads)
        lo = hi


def iter_representable_arrays(limit: int, **kw):
    for lo, bits in iter_windows(limit, **kw):
        yield np.flatnonzero(bits).astype(np.int64) + lo


def enumerate_representable(limit: int, **kw):
    """Increasing stream of the integers ``<= limit`` that are sums of four positive fourth powers."""
    if limit < 4:
        return
    for arr in iter_representable_arrays(limit, **kw):
        for v in arr.tolist():
            yield v


def representable_array(limit: int, **kw) -> np.ndarray:
    if limit < 4:
        return np.zeros(0, dtype=np.int64)
    parts = list(iter_representable_arrays(limit, **kw))
    return np.concatenate(parts) if parts else np.zeros(0, dtype=np.int64)


@dataclass
class GapReport:
    limit: int
    count: int
    max_gap: int
    histogram: dict = field(default_factory=dict)
    max_gap_location: int | None = None
    smallest: int | None = None
    largest: int | None = None

    def to_record(self) -> dict:
        return {
            "limit": str(self.limit),
            "count": self.count,
            "max_gap": self.max_gap,
            "max_gap_location": self.max_gap_location,
            "smallest": self.smallest,
            "largest": self.largest,
            "histogram": {str(k): v for k, v in sorted(self.histogram.items())},
        }


def gap_statistics(limit: int, **kw) -> GapReport:
    hist: Counter = Counter()
    count = 0
    smallest = largest = None
    max_gap, where = 0, None
    for arr in (iter_representable_arrays(limit, **kw) if limit >= 4 else ()):
        if arr.size == 0:
            continue
        if largest is not None:
            arr_ext = np.concatenate([[largest], arr])
        else:
            smallest = int(arr[0])
            arr_ext = arr
        gaps = np.diff(arr_ext)
        if gaps.size:
            vals, cnts = np.unique(gaps, return_counts=True)
            hist.update(dict(zip(vals.tolist(), cnts.tolist())))
            k = int(np.argmax(gaps))
            if gaps[k] > max_gap:
                max_gap, where = int(gaps[k]), int(arr_ext[k + 1])
        count += int(arr.size)
        largest = int(arr[-1])
    return GapReport(int(limit), count, max_gap, dict(sorted(hist.items())), where, smallest, largest)


def _prev_chunks(n_hi: int, **kw):
    """Yield ``(lo, prev)`` where ``prev[i]`` is the largest sum ``<= lo + i`` (or -1)."""
    carry = -1
    for lo, bits in iter_windows(n_hi, **kw):
        idx = np.where(bits, np.arange(lo, lo + bits.size, dtype=np.int64), -1)
        prev = np.maximum.accumulate(idx)
        prev = np.maximum(prev, carry)
        if prev.size:
            carry = int(prev[-1])
        yield lo, prev


def count_empty_intervals(N, Y, **kw) -> int:
    """Number of integers ``n`` in ``(N/2, N]`` whose interval ``(n - Y, n]`` holds no sum of four fourth powers."""
    n_lo = math.floor(N / 2) + 1
    n_hi = math.floor(N)
    if n_hi < n_lo:
        return 0
    # n - prev is an integer, so n - prev >= Y  <=>  n - prev >= ceil(Y)
    d = math.ceil(Y)
    total = 0
    for lo, prev in _prev_chunks(n_hi, **kw):
        n = np.arange(lo, lo + prev.size, dtype=np.int64)
        sel = n >= n_lo
        empty = (prev < 0) | (n - prev >= d)
        total += int(np.count_nonzero(empty & sel))
    return total


def count_empty_intervals_gamma(N, gamma, **kw) -> int:
    """Number of integers ``1 <= n <= N`` whose interval ``(n - n**gamma, n]`` holds no sum of four fourth powers."""
    n_hi = math.floor(N)
    if n_hi < 1:
        return 0
    g = float(gamma)
    total = 0
    for lo, prev in _prev_chunks(n_hi, **kw):
        n = np.arange(lo, lo + prev.size, dtype=np.int64)
        sel = n >= 1
        empty = (prev < 0) | ((n - prev).astype(np.float64) >= np.power(n.astype(np.float64), g))
        total += int(np.count_nonzero(empty & sel))
    return total


def dyadic_bound(N, gamma, gamma_prime, **kw) -> tuple[int, int]:
    """Right-hand side ``N0 + sum_k K'(N/2^k, (N/2^k)**gamma')`` of the dyadic covering bound.

    ``N0`` is the least integer with ``M**gamma' <= (M/2)**gamma`` for all ``M >= N0``.
    Returns ``(bound, N0)``.
    """
    g, gp = float(gamma), float(gamma_prime)
    if not gp < g:
        raise ValueError("need gamma' < gamma")
    N0 = math.ceil(2 ** (g / (g - gp)))
    if N < N0:
        return N0, N0
    total = N0
    for k in range(int(math.floor(math.log2(N / N0))) + 1):
        M = N / 2 ** k
        total += count_empty_intervals(M, M ** gp, **kw)
    return total, N0


@dataclass
class GreedyResult:
    n: int
    x: tuple
    remainder: int
    remainders: tuple = ()

    def to_record(self) -> dict:
        return {"n": str(self.n), "x": list(self.x), "remainder": str(self.remainder),
                "remainders": [str(r) for r in self.remainders]}


def greedy_approx(n: int) -> GreedyResult:
    """Subtract the largest fourth power four times in a row."""
    if n < 1:
        raise ValueError("n must be positive")
    rem, xs, rems = int(n), [], []
    for _ in range(4):
        x = iroot4(rem)
        xs.append(x)
        rem -= x ** 4
        rems.append(rem)
    return GreedyResult(int(n), tuple(xs), rem, tuple(rems))
