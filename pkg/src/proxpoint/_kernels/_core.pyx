"""Compiled twins of the kernels in ``pure.py``.

Same contract: C-contiguous float64 inputs, first-in-row-major witness on
ties, arithmetic matching the pure expressions bit for bit (see the parity
suite in tests/test_kernels.py).
"""
import numpy as np

from libc.math cimport INFINITY, fabs


def min_entry(const double[:, ::1] d):
    cdef Py_ssize_t n = d.shape[0], m = d.shape[1]
    cdef Py_ssize_t i, j, bi = 0, bj = 0
    cdef double best = d[0, 0], v
    for i in range(n):
        for j in range(m):
            v = d[i, j]
            if v < best:
                best = v
                bi = i
                bj = j
    return best, bi, bj


def max_diff(const double[:, ::1] a, const double[:, ::1] b):
    cdef Py_ssize_t n = a.shape[0], m = a.shape[1]
    cdef Py_ssize_t i, j, bi = 0, bj = 0
    cdef double best = a[0, 0] - b[0, 0], v
    for i in range(n):
        for j in range(m):
            v = a[i, j] - b[i, j]
            if v > best:
                best = v
                bi = i
                bj = j
    return best, bi, bj


def max_abs_diff(const double[:, ::1] a, const double[:, ::1] b):
    cdef Py_ssize_t n = a.shape[0], m = a.shape[1]
    cdef Py_ssize_t i, j, bi = 0, bj = 0
    cdef double best = fabs(a[0, 0] - b[0, 0]), v
    for i in range(n):
        for j in range(m):
            v = fabs(a[i, j] - b[i, j])
            if v > best:
                best = v
                bi = i
                bj = j
    return best, bi, bj


def row_mins(const double[:, ::1] d):
    cdef Py_ssize_t n = d.shape[0], m = d.shape[1]
    cdef Py_ssize_t i, j
    vals_arr = np.empty(n, dtype=np.float64)
    idx_arr = np.empty(n, dtype=np.int64)
    cdef double[::1] vals = vals_arr
    cdef long long[::1] idx = idx_arr
    cdef double best, v
    cdef Py_ssize_t bj
    for i in range(n):
        best = d[i, 0]
        bj = 0
        for j in range(1, m):
            v = d[i, j]
            if v < best:
                best = v
                bj = j
        vals[i] = best
        idx[i] = bj
    return vals_arr, idx_arr


def hausdorff_value(const double[:, ::1] d):
    cdef Py_ssize_t n = d.shape[0], m = d.shape[1]
    cdef Py_ssize_t i, j
    col_mins_arr = np.full(m, np.inf, dtype=np.float64)
    cdef double[::1] col_mins = col_mins_arr
    cdef double worst_row = -INFINITY, row_min, v, worst_col
    for i in range(n):
        row_min = INFINITY
        for j in range(m):
            v = d[i, j]
            if v < row_min:
                row_min = v
            if v < col_mins[j]:
                col_mins[j] = v
        if row_min > worst_row:
            worst_row = row_min
    worst_col = col_mins[0]
    for j in range(1, m):
        if col_mins[j] > worst_col:
            worst_col = col_mins[j]
    return worst_row if worst_row > worst_col else worst_col


def triangle_scan(const double[:, ::1] d):
    cdef Py_ssize_t n = d.shape[0]
    cdef Py_ssize_t i, j, k, bi = 0, bj = 0, bk = 0
    cdef double best = -INFINITY, v
    cdef long long count = 0
    for i in range(n):
        for j in range(n):
            for k in range(n):
                v = d[i, k] - (d[i, j] + d[j, k])
                if v > 0.0:
                    count += 1
                if v > best:
                    best = v
                    bi = i
                    bj = j
                    bk = k
    return best, bi, bj, bk, count
