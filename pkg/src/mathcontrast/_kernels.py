"""Edit-distance kernels.

The unit-cost Levenshtein DP is the hot inner loop of every similarity
computation (corpus dedup is O(n^2) pairs, retrieval is O(corpus) per
query, and each tree-distance call runs several of these). The default
kernel is numba-compiled; set ``MATHCONTRAST_NO_NUMBA=1`` to force the
pure-numpy fallback (also used automatically when numba is missing).

``benchmarks/bench_levenshtein.py`` compares the two paths.
"""

from __future__ import annotations

import os

import numpy as np

_NO_NUMBA = os.environ.get("MATHCONTRAST_NO_NUMBA", "") not in ("", "0")

try:
    from numba import njit

    HAS_NUMBA = True
except ImportError:  # pragma: no cover - exercised only without numba
    HAS_NUMBA = False


def encode(s: str) -> np.ndarray:
    """Map a string to an int32 code-point array for the kernels."""
    return np.fromiter(map(ord, s), dtype=np.int32, count=len(s))


def levenshtein_numpy(a: np.ndarray, b: np.ndarray) -> int:
    """Row-vectorized Levenshtein DP.

    The within-row dependency d[j] = min(cand[j], d[j-1] + 1) is a prefix
    minimum of cand[j] - j, which minimum.accumulate resolves without an
    inner Python loop.
    """
    n, m = a.size, b.size
    if n == 0:
        return m
    if m == 0:
        return n
    idx = np.arange(m + 1)
    prev = idx.copy()
    base = np.empty(m + 1, dtype=np.int64)
    for i in range(n):
        base[0] = i + 1
        np.minimum(prev[1:] + 1, prev[:-1] + (b != a[i]), out=base[1:])
        prev = np.minimum.accumulate(base - idx) + idx
    return int(prev[m])


def _levenshtein_loop(a: np.ndarray, b: np.ndarray) -> int:
    n = a.shape[0]
    m = b.shape[0]
    if n == 0:
        return m
    if m == 0:
        return n
    prev = np.arange(m + 1)
    cur = np.empty(m + 1, np.int64)
    for i in range(n):
        cur[0] = i + 1
        ai = a[i]
        for j in range(1, m + 1):
            c = prev[j - 1]
            if b[j - 1] != ai:
                c += 1
            if prev[j] + 1 < c:
                c = prev[j] + 1
            if cur[j - 1] + 1 < c:
                c = cur[j - 1] + 1
            cur[j] = c
        prev, cur = cur, prev
    return int(prev[m])


if HAS_NUMBA:
    levenshtein_njit = njit(cache=True)(_levenshtein_loop)
else:  # pragma: no cover
    levenshtein_njit = None

USING_NUMBA = HAS_NUMBA and not _NO_NUMBA

levenshtein_codes = levenshtein_njit if USING_NUMBA else levenshtein_numpy
