# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot kernels: Vandermonde materialization and the inner step of
the row-weight fixed-point iteration (weighted Gram assembly plus per-row
quadratic forms through a Cholesky factor)."""

import numpy as np

cimport numpy as cnp

cnp.import_array()


def vander_matrix(nodes, Py_ssize_t degree):
    cdef double[::1] t = np.ascontiguousarray(nodes, dtype=np.float64)
    cdef Py_ssize_t n = t.shape[0]
    out_arr = np.empty((n, degree), dtype=np.float64)
    cdef double[:, ::1] out = out_arr
    cdef Py_ssize_t i, j
    cdef double acc, ti
    for i in range(n):
        ti = t[i]
        acc = 1.0
        out[i, 0] = 1.0
        for j in range(1, degree):
            acc *= ti
            out[i, j] = acc
    return out_arr


def weighted_gram(a, u):
    cdef double[:, ::1] am = np.ascontiguousarray(a, dtype=np.float64)
    cdef double[::1] um = np.ascontiguousarray(u, dtype=np.float64)
    cdef Py_ssize_t n = am.shape[0]
    cdef Py_ssize_t d = am.shape[1]
    g_arr = np.zeros((d, d), dtype=np.float64)
    cdef double[:, ::1] g = g_arr
    cdef Py_ssize_t i, j, k
    cdef double ui, vj
    for i in range(n):
        ui = um[i]
        if ui == 0.0:
            continue
        for j in range(d):
            vj = ui * am[i, j]
            if vj == 0.0:
                continue
            for k in range(j, d):
                g[j, k] += vj * am[i, k]
    # mirror the upper triangle
    for j in range(d):
        for k in range(j + 1, d):
            g[k, j] = g[j, k]
    return g_arr


def tau_from_cholesky(a, lower):
    cdef double[:, ::1] am = np.ascontiguousarray(a, dtype=np.float64)
    cdef double[:, ::1] lm = np.ascontiguousarray(lower, dtype=np.float64)
    cdef Py_ssize_t n = am.shape[0]
    cdef Py_ssize_t d = am.shape[1]
    tau_arr = np.empty(n, dtype=np.float64)
    cdef double[::1] tau = tau_arr
    work_arr = np.empty(d, dtype=np.float64)
    cdef double[::1] y = work_arr
    cdef Py_ssize_t i, j, k
    cdef double s, acc
    for i in range(n):
        acc = 0.0
        for j in range(d):
            s = am[i, j]
            for k in range(j):
                s -= lm[j, k] * y[k]
            s /= lm[j, j]
            y[j] = s
            acc += s * s
        tau[i] = acc
    return tau_arr
