# distutils: language = c++
# cython: boundscheck=False, wraparound=False, language_level=3
"""Cython window-pair counter, the hot loop of graph construction.

Semantics match graphkpe._cooc_py.count_window_pairs exactly; see there
for the contract.
"""

from libcpp.unordered_map cimport unordered_map
from libcpp.vector cimport vector

import numpy as np

cimport numpy as cnp

cnp.import_array()


def count_window_pairs(ids, Py_ssize_t window, Py_ssize_t n_vocab):
    cdef cnp.ndarray[cnp.int32_t, ndim=1] arr = np.ascontiguousarray(ids, dtype=np.int32)
    cdef cnp.int32_t[::1] view = arr
    cdef unordered_map[long long, long long] counts
    cdef vector[int] buf
    cdef Py_ssize_t n = view.shape[0]
    cdef Py_ssize_t p, q, a, b, wlen, m
    cdef int t, u, v
    cdef bint dup
    for p in range(n):
        wlen = window if p + window <= n else n - p
        buf.clear()
        for q in range(wlen):
            t = view[p + q]
            dup = False
            m = <Py_ssize_t> buf.size()
            for a in range(m):
                if buf[a] == t:
                    dup = True
                    break
            if not dup:
                buf.push_back(t)
        m = <Py_ssize_t> buf.size()
        for a in range(m):
            for b in range(a + 1, m):
                u = buf[a]
                v = buf[b]
                if u > v:
                    u, v = v, u
                counts[(<long long> u) * n_vocab + v] += 1

    cdef Py_ssize_t n_pairs = counts.size()
    us = np.empty(n_pairs, dtype=np.int64)
    vs = np.empty(n_pairs, dtype=np.int64)
    ws = np.empty(n_pairs, dtype=np.int64)
    cdef cnp.int64_t[::1] us_v = us
    cdef cnp.int64_t[::1] vs_v = vs
    cdef cnp.int64_t[::1] ws_v = ws
    cdef Py_ssize_t i = 0
    cdef long long key
    for item in counts:
        key = item.first
        us_v[i] = key // n_vocab
        vs_v[i] = key % n_vocab
        ws_v[i] = item.second
        i += 1
    # unordered_map iteration order is arbitrary; sort for determinism
    order = np.lexsort((vs, us))
    return us[order], vs[order], ws[order]
