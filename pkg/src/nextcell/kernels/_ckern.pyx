# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot kernels: segment reductions and masked BFS."""

import numpy as np

cimport numpy as cnp

cnp.import_array()


def segment_sum_1d(cnp.float64_t[::1] values, cnp.int64_t[::1] seg, Py_ssize_t n):
    cdef cnp.ndarray[cnp.float64_t, ndim=1] out = np.zeros(n, dtype=np.float64)
    cdef cnp.float64_t[::1] o = out
    cdef Py_ssize_t k
    for k in range(values.shape[0]):
        o[seg[k]] += values[k]
    return out


def segment_sum_2d(cnp.float64_t[:, ::1] values, cnp.int64_t[::1] seg, Py_ssize_t n):
    cdef cnp.ndarray[cnp.float64_t, ndim=2] out = np.zeros((n, values.shape[1]), dtype=np.float64)
    cdef cnp.float64_t[:, ::1] o = out
    cdef Py_ssize_t k, j, f = values.shape[1]
    cdef cnp.int64_t row
    for k in range(values.shape[0]):
        row = seg[k]
        for j in range(f):
            o[row, j] += values[k, j]
    return out


def segment_max_1d(cnp.float64_t[::1] values, cnp.int64_t[::1] seg, Py_ssize_t n, double fill):
    cdef cnp.ndarray[cnp.float64_t, ndim=1] out = np.full(n, fill, dtype=np.float64)
    cdef cnp.float64_t[::1] o = out
    cdef Py_ssize_t k
    cdef cnp.int64_t row
    for k in range(values.shape[0]):
        row = seg[k]
        if values[k] > o[row]:
            o[row] = values[k]
    return out


def bfs_distances(cnp.int64_t[::1] indptr, cnp.int64_t[::1] indices,
                  cnp.int64_t start, cnp.int64_t max_depth,
                  cnp.int64_t blocked, cnp.int64_t skip_a, cnp.int64_t skip_b):
    cdef Py_ssize_t n = indptr.shape[0] - 1
    cdef cnp.ndarray[cnp.int64_t, ndim=1] dist = np.full(n, -1, dtype=np.int64)
    cdef cnp.int64_t[::1] d = dist
    if start == blocked or start < 0 or start >= n:
        return dist
    cdef cnp.ndarray[cnp.int64_t, ndim=1] queue = np.empty(n, dtype=np.int64)
    cdef cnp.int64_t[::1] q = queue
    cdef Py_ssize_t head = 0, tail = 0
    cdef cnp.int64_t i, j, di
    cdef Py_ssize_t p
    d[start] = 0
    q[tail] = start
    tail += 1
    while head < tail:
        i = q[head]
        head += 1
        di = d[i]
        if 0 <= max_depth <= di:
            continue
        for p in range(indptr[i], indptr[i + 1]):
            j = indices[p]
            if j == blocked or d[j] >= 0:
                continue
            if (i == skip_a and j == skip_b) or (i == skip_b and j == skip_a):
                continue
            d[j] = di + 1
            q[tail] = j
            tail += 1
    return dist
