"""Benchmark the numba and pure-numpy edit-distance kernels.

Times both paths over random aligned-formula pairs at several string
lengths, plus an end-to-end corpus ranking pass, and prints the
speedup. Run:

    python benchmarks/bench_levenshtein.py
"""

import random
import time

import numpy as np

from mathcontrast import _kernels
from mathcontrast.similarity import SimilarityConfig, tls

ALPHABET = "@+-*/()"


def random_pairs(n: int, length: int, seed: int):
    rng = random.Random(seed)
    pairs = []
    for _ in range(n):
        a = "".join(rng.choice(ALPHABET) for _ in range(length))
        b = "".join(rng.choice(ALPHABET) for _ in range(length))
        pairs.append((_kernels.encode(a), _kernels.encode(b)))
    return pairs


def time_kernel(kernel, pairs, repeats: int = 3) -> float:
    best = float("inf")
    for _ in range(repeats):
        start = time.perf_counter()
        for a, b in pairs:
            kernel(a, b)
        best = min(best, time.perf_counter() - start)
    return best


def bench_kernels():
    print(f"numba available: {_kernels.HAS_NUMBA}; active: {_kernels.USING_NUMBA}")
    if not _kernels.HAS_NUMBA:
        print("numba missing; nothing to compare")
        return
    # trigger JIT compilation outside the timed region
    warm = random_pairs(1, 8, seed=0)[0]
    _kernels.levenshtein_njit(*warm)

    print(f"\n{'length':>7} {'pairs':>7} {'numpy (s)':>10} {'numba (s)':>10} {'speedup':>8}")
    for length, n in ((8, 20000), (16, 20000), (32, 10000), (64, 5000), (128, 2000)):
        pairs = random_pairs(n, length, seed=length)
        t_numpy = time_kernel(_kernels.levenshtein_numpy, pairs)
        t_numba = time_kernel(_kernels.levenshtein_njit, pairs)
        print(
            f"{length:>7} {n:>7} {t_numpy:>10.3f} {t_numba:>10.3f} "
            f"{t_numpy / t_numba:>7.1f}x"
        )

    # sanity: both kernels agree on a fresh sample
    for a, b in random_pairs(500, 24, seed=1):
        assert _kernels.levenshtein_numpy(a, b) == _kernels.levenshtein_njit(a, b)
    print("\nkernels agree on 500 random pairs")


def bench_ranking():
    """Corpus-scale scoring: the workload retrieval and dedup produce."""
    from mathcontrast.semantic import HashingNgramProvider

    rng = random.Random(5)
    cfg = SimilarityConfig()
    sem = HashingNgramProvider()

    def formula(depth=0):
        if depth >= 4 or rng.random() < 0.35:
            return "@"
        if rng.random() < 0.2:
            return "(" + formula(depth + 1) + ")"
        return formula(depth + 1) + rng.choice("+-*/") + formula(depth + 1)

    corpus = [(f"question number {i} about things", formula()) for i in range(400)]
    target = ("a target question about things", formula())
    start = time.perf_counter()
    scores = [tls(target, entry, cfg, sem) for entry in corpus]
    elapsed = time.perf_counter() - start
    print(
        f"\nscored {len(corpus)} corpus entries in {elapsed * 1e3:.1f} ms "
        f"(best {max(scores):.3f})"
    )


if __name__ == "__main__":
    np.random.seed(0)
    bench_kernels()
    bench_ranking()
