# cython: language_level=3, boundscheck=False, wraparound=False
"""Compiled inner loops; ``tamechar.kernels`` falls back to numpy without them."""

import numpy as np


def trace_histogram(const long long[:, :] gram, const long long[:, :] add,
                    const long long[:, :] mul, const long long[:] tau,
                    const long long[:] tr, int q, int p, int d):
    """counts[t] = #{v in GF(q)^d : Tr(v^T G tau(v)) = t}."""
    cdef long long total = 1
    cdef int i, j
    for i in range(d):
        total *= q
    counts = np.zeros(p, dtype=np.int64)
    cdef long long[:] c = counts
    cdef long long[:] v = np.zeros(max(d, 1), dtype=np.int64)
    cdef long long[:] tv = np.zeros(max(d, 1), dtype=np.int64)
    cdef long long idx, rest, acc, row
    for idx in range(total):
        rest = idx
        for i in range(d):
            v[i] = rest % q
            tv[i] = tau[v[i]]
            rest //= q
        acc = 0
        for i in range(d):
            if v[i] == 0:
                continue
            row = 0
            for j in range(d):
                if tv[j] != 0 and gram[i, j] != 0:
                    row = add[row, mul[gram[i, j], tv[j]]]
            acc = add[acc, mul[v[i], row]]
        c[tr[acc]] += 1
    return counts
