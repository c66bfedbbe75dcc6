# cython: boundscheck=False, wraparound=False, cdivision=True
"""Fused per-step update kernels (compiled lane).

Each kernel mirrors the numpy fallback in leadopt._fused_py with the
same floating-point operation order, so the two lanes are bitwise
interchangeable.
"""

import numpy as np

cimport numpy as cnp

cnp.import_array()

BACKEND = "cython"


def lsgd_update(double[::1] x, double[::1] g, double[::1] xl, double[::1] xg,
                double eta, double lam, double lam_g):
    cdef Py_ssize_t i, n = x.shape[0]
    out_arr = np.empty(n)
    cdef double[::1] out = out_arr
    for i in range(n):
        out[i] = x[i] - eta * g[i] - lam * (x[i] - xl[i]) - lam_g * (x[i] - xg[i])
    return out_arr


def sgd_update(double[::1] x, double[::1] g, double eta):
    cdef Py_ssize_t i, n = x.shape[0]
    out_arr = np.empty(n)
    cdef double[::1] out = out_arr
    for i in range(n):
        out[i] = x[i] - eta * g[i]
    return out_arr


def pull_update(double[::1] x, double[::1] leader, double coeff):
    cdef Py_ssize_t i, n = x.shape[0]
    out_arr = np.empty(n)
    cdef double[::1] out = out_arr
    for i in range(n):
        out[i] = x[i] - coeff * (x[i] - leader[i])
    return out_arr


def eagd_worker_update(double[::1] x, double[::1] g, double[::1] center,
                       double eta, double lam):
    cdef Py_ssize_t i, n = x.shape[0]
    cdef double keep = 1.0 - eta * lam
    cdef double mix = eta * lam
    out_arr = np.empty(n)
    cdef double[::1] out = out_arr
    for i in range(n):
        out[i] = keep * x[i] + mix * center[i] - eta * g[i]
    return out_arr


def eagd_center_update(double[::1] center, double[::1] worker_mean, double rate):
    cdef Py_ssize_t i, n = center.shape[0]
    cdef double keep = 1.0 - rate
    out_arr = np.empty(n)
    cdef double[::1] out = out_arr
    for i in range(n):
        out[i] = keep * center[i] + rate * worker_mean[i]
    return out_arr
