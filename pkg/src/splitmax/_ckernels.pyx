# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled independent-cascade kernel over pre-drawn live-edge worlds."""

import numpy as np
cimport numpy as cnp

cnp.import_array()

ctypedef cnp.int64_t i64
ctypedef cnp.uint8_t u8


def ic_reach(const i64[::1] indptr, const i64[::1] indices, const u8[:, ::1] live,
             const i64[::1] seeds, i64[::1] counts, i64[::1] sizes):
    """Breadth-first reachability from ``seeds`` in each world (row of ``live``).

    Adds one to ``counts[v]`` for every world in which ``v`` is reached and
    stores the number of reached nodes of world ``r`` in ``sizes[r]``.
    """
    cdef Py_ssize_t n = indptr.shape[0] - 1
    cdef Py_ssize_t n_worlds = live.shape[0]
    cdef Py_ssize_t n_seeds = seeds.shape[0]
    cdef i64[::1] stamp = np.zeros(n, dtype=np.int64)
    cdef i64[::1] queue = np.empty(max(n, 1), dtype=np.int64)
    cdef Py_ssize_t r, i, head, tail, e
    cdef i64 u, v, mark

    with nogil:
        for r in range(n_worlds):
            mark = r + 1
            tail = 0
            for i in range(n_seeds):
                u = seeds[i]
                if stamp[u] != mark:
                    stamp[u] = mark
                    queue[tail] = u
                    tail += 1
            head = 0
            while head < tail:
                u = queue[head]
                head += 1
                for e in range(indptr[u], indptr[u + 1]):
                    if live[r, e]:
                        v = indices[e]
                        if stamp[v] != mark:
                            stamp[v] = mark
                            queue[tail] = v
                            tail += 1
            sizes[r] = tail
            for i in range(tail):
                counts[queue[i]] += 1
