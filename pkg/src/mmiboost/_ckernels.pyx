# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled split search; see ``_pykernels.best_split`` for the contract."""

import numpy as np
cimport numpy as cnp

cnp.import_array()


def best_split(const cnp.uint16_t[:, ::1] bins, const double[::1] wpos,
               const double[::1] wneg, const cnp.intp_t[::1] idx, Py_ssize_t m):
    cdef Py_ssize_t p = bins.shape[1]
    cdef Py_ssize_t width = m + 1
    cdef Py_ssize_t k = idx.shape[0]
    cdef double[:, ::1] hp = np.zeros((p, width))
    cdef double[:, ::1] hn = np.zeros((p, width))
    cdef Py_ssize_t s, i, f, j
    cdef double a, b, lp, ln, tp, tn, rp, rn, err
    cdef double best = np.inf
    cdef Py_ssize_t bf = 0, bj = 0
    cdef double blp = 0, bln = 0, brp = 0, brn = 0

    with nogil:
        for s in range(k):
            i = idx[s]
            a = wpos[i]
            b = wneg[i]
            for f in range(p):
                hp[f, bins[i, f]] += a
                hn[f, bins[i, f]] += b

        for f in range(p):
            tp = 0.0
            tn = 0.0
            for j in range(width):
                tp = tp + hp[f, j]
                tn = tn + hn[f, j]
            lp = 0.0
            ln = 0.0
            for j in range(m):
                lp = lp + hp[f, j]
                ln = ln + hn[f, j]
                rp = tp - lp
                rn = tn - ln
                err = (lp if lp < ln else ln) + (rp if rp < rn else rn)
                if err < best:
                    best = err
                    bf = f
                    bj = j
                    blp = lp
                    bln = ln
                    brp = rp
                    brn = rn
    return (int(bf), int(bj), best, blp, bln, brp, brn)


def pivot(double[:, ::1] M, Py_ssize_t r, Py_ssize_t e):
    """In-place Gauss-Jordan pivot of tableau ``M`` on element ``(r, e)``."""
    cdef Py_ssize_t rows = M.shape[0], cols = M.shape[1]
    cdef Py_ssize_t i, j
    cdef double piv = M[r, e]
    cdef double f
    with nogil:
        for j in range(cols):
            M[r, j] = M[r, j] / piv
        for i in range(rows):
            if i == r:
                continue
            f = M[i, e]
            if f == 0.0:
                continue
            for j in range(cols):
                M[i, j] = M[i, j] - f * M[r, j]
            M[i, e] = 0.0
        M[r, e] = 1.0
