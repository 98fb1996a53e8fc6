# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled kernels: same contract as _numpy_impl, fused loops, no temporaries."""

import numpy as np

cimport cython


def tropical_distance(const double[::1] v, const double[::1] w):
    cdef Py_ssize_t i, e = v.shape[0]
    cdef double d, hi, lo
    hi = v[0] - w[0]
    lo = hi
    for i in range(1, e):
        d = v[i] - w[i]
        if d > hi:
            hi = d
        elif d < lo:
            lo = d
    return hi - lo


def project_point(const double[:, ::1] vertices, const double[::1] point):
    cdef Py_ssize_t s = vertices.shape[0], e = vertices.shape[1]
    cdef Py_ssize_t k, j
    cdef double lo, d, hi
    proj_arr = np.empty(e, dtype=np.float64)
    lam_arr = np.empty(s, dtype=np.float64)
    cdef double[::1] proj = proj_arr
    cdef double[::1] lam = lam_arr
    with nogil:
        for k in range(s):
            lo = point[0] - vertices[k, 0]
            for j in range(1, e):
                d = point[j] - vertices[k, j]
                if d < lo:
                    lo = d
            lam[k] = lo
        for j in range(e):
            hi = lam[0] + vertices[0, j]
            for k in range(1, s):
                d = lam[k] + vertices[k, j]
                if d > hi:
                    hi = d
            proj[j] = hi
    return proj_arr, lam_arr


def project_batch(const double[:, ::1] vertices, const double[:, ::1] points):
    cdef Py_ssize_t n = points.shape[0], s = vertices.shape[0], e = vertices.shape[1]
    cdef Py_ssize_t i, k, j
    cdef double lo, d, hi
    proj_arr = np.empty((n, e), dtype=np.float64)
    lam_arr = np.empty((n, s), dtype=np.float64)
    cdef double[:, ::1] proj = proj_arr
    cdef double[:, ::1] lam = lam_arr
    with nogil:
        for i in range(n):
            for k in range(s):
                lo = points[i, 0] - vertices[k, 0]
                for j in range(1, e):
                    d = points[i, j] - vertices[k, j]
                    if d < lo:
                        lo = d
                lam[i, k] = lo
            for j in range(e):
                hi = lam[i, 0] + vertices[0, j]
                for k in range(1, s):
                    d = lam[i, k] + vertices[k, j]
                    if d > hi:
                        hi = d
                proj[i, j] = hi
    return proj_arr, lam_arr


def residual_batch(const double[:, ::1] vertices, const double[:, ::1] points):
    cdef Py_ssize_t n = points.shape[0], s = vertices.shape[0], e = vertices.shape[1]
    cdef Py_ssize_t i, k, j
    cdef double lo, d, hi, rhi, rlo
    out_arr = np.empty(n, dtype=np.float64)
    lam_arr = np.empty(s, dtype=np.float64)
    cdef double[::1] out = out_arr
    cdef double[::1] lam = lam_arr
    with nogil:
        for i in range(n):
            for k in range(s):
                lo = points[i, 0] - vertices[k, 0]
                for j in range(1, e):
                    d = points[i, j] - vertices[k, j]
                    if d < lo:
                        lo = d
                lam[k] = lo
            rhi = 0.0
            rlo = 0.0
            for j in range(e):
                hi = lam[0] + vertices[0, j]
                for k in range(1, s):
                    d = lam[k] + vertices[k, j]
                    if d > hi:
                        hi = d
                # residual tracks points[i] - projection without storing it
                d = points[i, j] - hi
                if j == 0:
                    rhi = d
                    rlo = d
                elif d > rhi:
                    rhi = d
                elif d < rlo:
                    rlo = d
            out[i] = rhi - rlo
    return out_arr
