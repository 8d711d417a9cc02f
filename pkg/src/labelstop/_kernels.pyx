# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot kernels; see ``_kernels_py`` for the reference semantics."""

import numpy as np
cimport numpy as cnp
from libc.math cimport INFINITY

cnp.import_array()


def best_stump(X, order, y, w):
    cdef const double[:, :] xv = np.ascontiguousarray(X, dtype=np.float64)
    cdef const cnp.int64_t[:, :] ov = np.ascontiguousarray(order, dtype=np.int64)
    cdef const double[:] yv = np.ascontiguousarray(y, dtype=np.float64)
    cdef const double[:] wv = np.ascontiguousarray(w, dtype=np.float64)
    cdef Py_ssize_t n = xv.shape[0]
    cdef Py_ssize_t d = xv.shape[1]
    cdef Py_ssize_t f, j, a, b
    cdef double tp, tn, lp, ln, e, best = INFINITY, thr = 0.0
    cdef int best_f = -1, best_p = 1
    if n < 2:
        return -1, 0.0, 1, np.inf
    for f in range(d):
        tp = 0.0
        tn = 0.0
        for j in range(n):
            a = ov[j, f]
            if yv[a] > 0:
                tp = tp + wv[a]
            else:
                tn = tn + wv[a]
        lp = 0.0
        ln = 0.0
        for j in range(n - 1):
            a = ov[j, f]
            b = ov[j + 1, f]
            if yv[a] > 0:
                lp = lp + wv[a]
            else:
                ln = ln + wv[a]
            if not xv[a, f] < xv[b, f]:
                continue
            e = lp + (tn - ln)
            if e < best:
                best = e
                best_f = f
                best_p = 1
                thr = 0.5 * (xv[a, f] + xv[b, f])
            e = ln + (tp - lp)
            if e < best:
                best = e
                best_f = f
                best_p = -1
                thr = 0.5 * (xv[a, f] + xv[b, f])
    if best_f < 0:
        return -1, 0.0, 1, np.inf
    return best_f, thr, best_p, best
