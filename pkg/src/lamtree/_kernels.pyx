# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled subset kernels; semantics match lamtree._kernels_py."""

import numpy as np


def inner_sums(int n, long[:] us, long[:] vs, double[:] ws):
    cdef Py_ssize_t size = 1 << n
    cdef double[:, :] weight = np.zeros((n, n))
    cdef Py_ssize_t e, mask, rest, u, low
    cdef double acc
    for e in range(us.shape[0]):
        weight[us[e], vs[e]] += ws[e]
        weight[vs[e], us[e]] += ws[e]
    out_arr = np.zeros(size)
    cdef double[:] out = out_arr
    for mask in range(1, size):
        low = 0
        while not (mask >> low) & 1:
            low += 1
        rest = mask & (mask - 1)
        acc = out[rest]
        for u in range(low + 1, n):
            if (rest >> u) & 1:
                acc += weight[low, u]
        out[mask] = acc
    return out_arr


def cut_sums(int n, long[:] us, long[:] vs, double[:] ws):
    cdef Py_ssize_t size = 1 << n
    cdef double[:] inner = inner_sums(n, us, vs, ws)
    cdef double[:] degree = np.zeros(n)
    cdef Py_ssize_t e, mask, v
    cdef double acc
    for e in range(us.shape[0]):
        degree[us[e]] += ws[e]
        degree[vs[e]] += ws[e]
    out_arr = np.zeros(size)
    cdef double[:] out = out_arr
    for mask in range(1, size):
        acc = 0.0
        for v in range(n):
            if (mask >> v) & 1:
                acc += degree[v]
        out[mask] = acc - 2.0 * inner[mask]
    return out_arr


def matching_dp(int k, double[:, :] dist):
    cdef Py_ssize_t size = 1 << k
    cdef Py_ssize_t full = size - 1
    cdef Py_ssize_t mask, i, j, nxt
    cdef double inf = float("inf")
    cdef double cand
    best_arr = np.full(size, inf)
    choice_arr = np.full(size, -1, dtype=np.int64)
    cdef double[:] best = best_arr
    cdef long long[:] choice = choice_arr
    best[0] = 0.0
    for mask in range(size):
        if best[mask] == inf or mask == full:
            continue
        i = 0
        while (mask >> i) & 1:
            i += 1
        for j in range(i + 1, k):
            if not (mask >> j) & 1:
                nxt = mask | (1 << i) | (1 << j)
                cand = best[mask] + dist[i, j]
                if cand < best[nxt]:
                    best[nxt] = cand
                    choice[nxt] = i * k + j
    pairs = []
    mask = full
    while mask:
        i = choice[mask] // k
        j = choice[mask] % k
        pairs.append((int(i), int(j)))
        mask ^= (1 << i) | (1 << j)
    return float(best[full]), sorted(pairs)
