# cython: language_level=3, boundscheck=False, wraparound=False, initializedcheck=False
"""Compiled edit-distance kernel. Mirrors ``_kernels_py.edit_counts``."""

from libc.stdlib cimport free, malloc


def edit_counts(const long long[::1] ref, const long long[::1] hyp):
    """Return (substitutions, insertions, deletions) of a minimal alignment.

    Backtrace prefers the diagonal (match/substitution), then insertion,
    then deletion.
    """
    cdef Py_ssize_t n = ref.shape[0]
    cdef Py_ssize_t m = hyp.shape[0]
    cdef Py_ssize_t w = m + 1
    cdef Py_ssize_t i, j
    cdef int a, b, c, cost
    cdef long subs = 0, ins = 0, dels = 0
    cdef int* d = <int*> malloc((n + 1) * w * sizeof(int))
    if d == NULL:
        raise MemoryError()
    try:
        for j in range(w):
            d[j] = <int> j
        for i in range(1, n + 1):
            d[i * w] = <int> i
            for j in range(1, w):
                cost = 0 if ref[i - 1] == hyp[j - 1] else 1
                a = d[(i - 1) * w + j - 1] + cost
                b = d[i * w + j - 1] + 1
                c = d[(i - 1) * w + j] + 1
                if b < a:
                    a = b
                if c < a:
                    a = c
                d[i * w + j] = a
        i = n
        j = m
        while i > 0 or j > 0:
            if i > 0 and j > 0:
                cost = 0 if ref[i - 1] == hyp[j - 1] else 1
                if d[i * w + j] == d[(i - 1) * w + j - 1] + cost:
                    subs += cost
                    i -= 1
                    j -= 1
                    continue
            if j > 0 and d[i * w + j] == d[i * w + j - 1] + 1:
                ins += 1
                j -= 1
            else:
                dels += 1
                i -= 1
    finally:
        free(d)
    return subs, ins, dels
