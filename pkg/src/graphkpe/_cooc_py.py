"""Pure-Python window-pair counter; fallback for the Cython kernel."""

import numpy as np


def count_window_pairs(ids, window, n_vocab):
    """Count unordered distinct-type pairs per sliding window.

    One window per token position, covering ids[p:p+window] truncated at
    the sequence end; a pair is counted once per window even when a type
    repeats inside it. Returns (us, vs, counts) int64 arrays with u < v,
    sorted by (u, v).
    """
    counts: dict[tuple[int, int], int] = {}
    n = len(ids)
    for p in range(n):
        types = sorted(set(int(t) for t in ids[p : p + window]))
        for a in range(len(types)):
            for b in range(a + 1, len(types)):
                key = (types[a], types[b])
                counts[key] = counts.get(key, 0) + 1
    if not counts:
        empty = np.zeros(0, dtype=np.int64)
        return empty, empty.copy(), empty.copy()
    pairs = sorted(counts)
    us = np.array([p[0] for p in pairs], dtype=np.int64)
    vs = np.array([p[1] for p in pairs], dtype=np.int64)
    ws = np.array([counts[p] for p in pairs], dtype=np.int64)
    return us, vs, ws
