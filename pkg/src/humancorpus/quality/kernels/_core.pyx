# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled image-quality kernels (hot inner loops of feature extraction).

Mirrors the NumPy backend in ``_ref.py``: separable symmetric-boundary
local moments, neighboring-coefficient products, single-pass signed
moments, and 2x box downsampling.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport fabs, sqrt

cnp.import_array()

BACKEND = "cython"


cdef inline Py_ssize_t _sym_index(Py_ssize_t i, Py_ssize_t n) nogil:
    # Half-sample symmetric extension: ... c b a | a b c ... | c b a
    while i < 0 or i >= n:
        if i < 0:
            i = -i - 1
        if i >= n:
            i = 2 * n - 1 - i
    return i


def local_mean_std(image, kernel1d):
    img = np.ascontiguousarray(image, dtype=np.float64)
    k = np.ascontiguousarray(kernel1d, dtype=np.float64)
    cdef double[:, ::1] a = img
    cdef double[::1] kv = k
    cdef Py_ssize_t rows = a.shape[0], cols = a.shape[1]
    cdef Py_ssize_t ksize = kv.shape[0], half = ksize // 2
    mu_np = np.empty((rows, cols), dtype=np.float64)
    sg_np = np.empty((rows, cols), dtype=np.float64)
    tmp1_np = np.empty((rows, cols), dtype=np.float64)
    tmp2_np = np.empty((rows, cols), dtype=np.float64)
    cdef double[:, ::1] mu = mu_np, sg = sg_np, t1 = tmp1_np, t2 = tmp2_np
    cdef Py_ssize_t i, j, t, src
    cdef double acc1, acc2, v, var
    with nogil:
        # Vertical pass over image and image^2.
        for i in range(rows):
            for j in range(cols):
                acc1 = 0.0
                acc2 = 0.0
                for t in range(ksize):
                    src = _sym_index(i + t - half, rows)
                    v = a[src, j]
                    acc1 += kv[t] * v
                    acc2 += kv[t] * v * v
                t1[i, j] = acc1
                t2[i, j] = acc2
        # Horizontal pass.
        for i in range(rows):
            for j in range(cols):
                acc1 = 0.0
                acc2 = 0.0
                for t in range(ksize):
                    src = _sym_index(j + t - half, cols)
                    acc1 += kv[t] * t1[i, src]
                    acc2 += kv[t] * t2[i, src]
                var = acc2 - acc1 * acc1
                if var < 0.0:
                    var = 0.0
                mu[i, j] = acc1
                sg[i, j] = sqrt(var)
    return mu_np, sg_np


def paired_products(m):
    arr = np.ascontiguousarray(m, dtype=np.float64)
    cdef double[:, ::1] a = arr
    cdef Py_ssize_t rows = a.shape[0], cols = a.shape[1]
    h_np = np.empty((rows, cols - 1), dtype=np.float64)
    v_np = np.empty((rows - 1, cols), dtype=np.float64)
    d1_np = np.empty((rows - 1, cols - 1), dtype=np.float64)
    d2_np = np.empty((rows - 1, cols - 1), dtype=np.float64)
    cdef double[:, ::1] h = h_np, v = v_np, d1 = d1_np, d2 = d2_np
    cdef Py_ssize_t i, j
    with nogil:
        for i in range(rows):
            for j in range(cols - 1):
                h[i, j] = a[i, j] * a[i, j + 1]
        for i in range(rows - 1):
            for j in range(cols):
                v[i, j] = a[i, j] * a[i + 1, j]
        for i in range(rows - 1):
            for j in range(cols - 1):
                d1[i, j] = a[i, j] * a[i + 1, j + 1]
                d2[i, j] = a[i + 1, j] * a[i, j + 1]
    return h_np, v_np, d1_np, d2_np


def signed_moments(x):
    flat = np.ascontiguousarray(x, dtype=np.float64).ravel()
    cdef double[::1] a = flat
    cdef Py_ssize_t n = a.shape[0], i
    cdef Py_ssize_t n_neg = 0, n_pos = 0
    cdef double sum_abs = 0.0, sum_sq = 0.0
    cdef double sum_sq_neg = 0.0, sum_sq_pos = 0.0
    cdef double v, sq
    with nogil:
        for i in range(n):
            v = a[i]
            sq = v * v
            sum_abs += fabs(v)
            sum_sq += sq
            if v < 0.0:
                n_neg += 1
                sum_sq_neg += sq
            elif v > 0.0:
                n_pos += 1
                sum_sq_pos += sq
    return (int(n), sum_abs, sum_sq, int(n_neg), sum_sq_neg,
            int(n_pos), sum_sq_pos)


def box_downsample2(image):
    img = np.ascontiguousarray(image, dtype=np.float64)
    cdef double[:, ::1] a = img
    cdef Py_ssize_t h2 = a.shape[0] // 2, w2 = a.shape[1] // 2
    if h2 == 0 or w2 == 0:
        raise ValueError("image too small to downsample")
    out_np = np.empty((h2, w2), dtype=np.float64)
    cdef double[:, ::1] out = out_np
    cdef Py_ssize_t i, j
    with nogil:
        for i in range(h2):
            for j in range(w2):
                out[i, j] = 0.25 * (a[2 * i, 2 * j] + a[2 * i, 2 * j + 1]
                                    + a[2 * i + 1, 2 * j] + a[2 * i + 1, 2 * j + 1])
    return out_np
