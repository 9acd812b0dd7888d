# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Fused pairwise kernel builders (compiled fast path).

Each entry computes distance/dot and kernel value in a single pass per pair,
avoiding the P x Q x D temporaries of the NumPy expansion.  The symmetric
case fills both triangles from one evaluation, so Gram matrices come out
bitwise symmetric with an exact diagonal.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport exp, log1p, pow, sqrt, tanh

cnp.import_array()


def cov_matrix(int kind, double[:, ::1] X, double[:, ::1] Y, double sigma_f,
               double[::1] inv_ls, double alpha, bint symmetric):
    """P x Q latent-process covariance matrix (kind codes as in _backend)."""
    cdef Py_ssize_t P = X.shape[0]
    cdef Py_ssize_t Q = Y.shape[0]
    cdef Py_ssize_t D = X.shape[1]
    out = np.empty((P, Q), dtype=np.float64)
    cdef double[:, ::1] o = out
    cdef Py_ssize_t i, j, d, j0
    cdef double r2, diff, t, v
    cdef double s2 = sigma_f * sigma_f
    cdef double two_alpha = 2.0 * alpha
    if kind < 0 or kind > 2:
        raise ValueError(f"unknown covariance kind code {kind}")
    for i in range(P):
        j0 = i if symmetric else 0
        for j in range(j0, Q):
            r2 = 0.0
            for d in range(D):
                diff = (X[i, d] - Y[j, d]) * inv_ls[d]
                r2 += diff * diff
            if kind == 0:
                v = s2 * exp(-0.5 * r2)
            elif kind == 1:
                v = s2 * exp(-alpha * log1p(r2 / two_alpha))
            else:
                t = sqrt(3.0 * r2)
                v = s2 * (1.0 + t) * exp(-t)
            o[i, j] = v
            if symmetric:
                o[j, i] = v
    return out


def kernel_matrix(int kind, double[:, ::1] X, double[:, ::1] Y, double sigma,
                  double a, double b, bint symmetric):
    """P x Q feature-space kernel matrix for KPCA (kind codes as in _backend)."""
    cdef Py_ssize_t P = X.shape[0]
    cdef Py_ssize_t Q = Y.shape[0]
    cdef Py_ssize_t D = X.shape[1]
    out = np.empty((P, Q), dtype=np.float64)
    cdef double[:, ::1] o = out
    cdef Py_ssize_t i, j, d, j0
    cdef double acc, diff, v
    cdef double inv_2s2 = 0.0
    cdef double inv_s = 0.0
    if kind == 1:
        inv_2s2 = 1.0 / (2.0 * sigma * sigma)
    elif kind == 4:
        inv_s = 1.0 / sigma
    elif kind < 0 or kind > 4:
        raise ValueError(f"unknown kernel kind code {kind}")
    for i in range(P):
        j0 = i if symmetric else 0
        for j in range(j0, Q):
            acc = 0.0
            if kind == 0 or kind == 2 or kind == 3:
                for d in range(D):
                    acc += X[i, d] * Y[j, d]
                if kind == 0:
                    v = acc
                elif kind == 2:
                    v = pow(acc + a, b)
                else:
                    v = tanh(a * acc + b)
            else:
                for d in range(D):
                    diff = X[i, d] - Y[j, d]
                    acc += diff * diff
                if kind == 1:
                    v = exp(-acc * inv_2s2)
                else:
                    v = exp(-sqrt(acc) * inv_s)
            o[i, j] = v
            if symmetric:
                o[j, i] = v
    return out
