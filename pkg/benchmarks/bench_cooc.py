#!/usr/bin/env python3
"""Benchmark the co-occurrence pair-counting kernels.

Compares the compiled Cython kernel against the pure-Python fallback on
synthetic documents of increasing length (Zipf-distributed vocabulary,
long-document sizes) and verifies both backends agree.

Usage: python benchmarks/bench_cooc.py [--window 4] [--repeats 3]
"""

import argparse
import time

import numpy as np

import graphkpe._cooc_py as cooc_py

try:
    import graphkpe._cooc_cy as cooc_cy
except ImportError:
    cooc_cy = None


def synthetic_ids(n_tokens: int, vocab_size: int, seed: int) -> np.ndarray:
    rng = np.random.default_rng(seed)
    ranks = np.arange(1, vocab_size + 1, dtype=np.float64)
    probs = (1.0 / ranks) / np.sum(1.0 / ranks)
    return rng.choice(vocab_size, size=n_tokens, p=probs).astype(np.int32)


def time_backend(fn, ids, window, vocab_size, repeats):
    best = float("inf")
    result = None
    for _ in range(repeats):
        start = time.perf_counter()
        result = fn(ids, window, vocab_size)
        best = min(best, time.perf_counter() - start)
    return best, result


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--window", type=int, default=4)
    parser.add_argument("--repeats", type=int, default=3)
    parser.add_argument(
        "--sizes", type=int, nargs="+", default=[1_000, 5_000, 20_000, 100_000]
    )
    args = parser.parse_args()

    if cooc_cy is None:
        print("Cython kernel not built; benchmarking the fallback only.")
    print(f"window={args.window}, repeats={args.repeats} (best-of)")
    header = f"{'tokens':>10} {'vocab':>7} {'python':>12} {'cython':>12} {'speedup':>8}"
    print(header)
    print("-" * len(header))
    for n in args.sizes:
        vocab_size = max(50, n // 20)
        ids = synthetic_ids(n, vocab_size, seed=1)
        t_py, res_py = time_backend(
            cooc_py.count_window_pairs, ids, args.window, vocab_size, args.repeats
        )
        if cooc_cy is not None:
            t_cy, res_cy = time_backend(
                cooc_cy.count_window_pairs, ids, args.window, vocab_size, args.repeats
            )
            for a, b in zip(res_py, res_cy):
                assert np.array_equal(a, b), "backends disagree"
            print(
                f"{n:>10,} {vocab_size:>7,} {t_py * 1e3:>10.1f}ms "
                f"{t_cy * 1e3:>10.1f}ms {t_py / t_cy:>7.1f}x"
            )
        else:
            print(f"{n:>10,} {vocab_size:>7,} {t_py * 1e3:>10.1f}ms {'-':>12} {'-':>8}")


if __name__ == "__main__":
    main()
