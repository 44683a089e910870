# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled Haar kernels; same layout contract as _haar_np."""

import numpy as np

cimport numpy as cnp

cnp.import_array()


def dwt2_batch(object x_in):
    cdef cnp.ndarray[cnp.float64_t, ndim=3] x = np.ascontiguousarray(x_in, dtype=np.float64)
    cdef Py_ssize_t n = x.shape[0], p = x.shape[1], q = x.shape[2]
    cdef Py_ssize_t h = p // 2, w = q // 2
    cdef cnp.ndarray[cnp.float64_t, ndim=4] out = np.empty((n, 4, h, w), dtype=np.float64)
    cdef Py_ssize_t k, i, j
    cdef double a, b, c, d
    cdef double[:, :, :] xv = x
    cdef double[:, :, :, :] ov = out
    with nogil:
        for k in range(n):
            for i in range(h):
                for j in range(w):
                    a = xv[k, 2 * i, 2 * j]
                    b = xv[k, 2 * i, 2 * j + 1]
                    c = xv[k, 2 * i + 1, 2 * j]
                    d = xv[k, 2 * i + 1, 2 * j + 1]
                    ov[k, 0, i, j] = (a + b + c + d) * 0.5
                    ov[k, 1, i, j] = (a + b - c - d) * 0.5
                    ov[k, 2, i, j] = (a - b + c - d) * 0.5
                    ov[k, 3, i, j] = (a - b - c + d) * 0.5
    return out


def idwt2_batch(object sb_in):
    cdef cnp.ndarray[cnp.float64_t, ndim=4] sb = np.ascontiguousarray(sb_in, dtype=np.float64)
    cdef Py_ssize_t n = sb.shape[0], h = sb.shape[2], w = sb.shape[3]
    cdef cnp.ndarray[cnp.float64_t, ndim=3] out = np.empty((n, 2 * h, 2 * w), dtype=np.float64)
    cdef Py_ssize_t k, i, j
    cdef double ll, lh, hl, hh
    cdef double[:, :, :, :] sv = sb
    cdef double[:, :, :] ov = out
    with nogil:
        for k in range(n):
            for i in range(h):
                for j in range(w):
                    ll = sv[k, 0, i, j]
                    lh = sv[k, 1, i, j]
                    hl = sv[k, 2, i, j]
                    hh = sv[k, 3, i, j]
                    ov[k, 2 * i, 2 * j] = (ll + lh + hl + hh) * 0.5
                    ov[k, 2 * i, 2 * j + 1] = (ll + lh - hl - hh) * 0.5
                    ov[k, 2 * i + 1, 2 * j] = (ll - lh + hl - hh) * 0.5
                    ov[k, 2 * i + 1, 2 * j + 1] = (ll - lh - hl + hh) * 0.5
    return out
