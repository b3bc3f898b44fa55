# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels for the projection hot loops.

Mirrors ``_python`` exactly in contract; uses direct accumulation instead
of the expanded quadratic form, so results can differ from the fallback in
the last bits.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport exp, fabs, log, INFINITY

cnp.import_array()

LN2 = 0.6931471805599453

BACKEND_NAME = "ext"


def pairwise_sq_dists(x):
    """Squared Euclidean distances between rows: symmetric, zero diagonal."""
    cdef const double[:, ::1] xv = np.ascontiguousarray(x, dtype=np.float64)
    cdef Py_ssize_t n = xv.shape[0]
    cdef Py_ssize_t d = xv.shape[1]
    out_arr = np.zeros((n, n), dtype=np.float64)
    cdef double[:, ::1] out = out_arr
    cdef Py_ssize_t i, j, k
    cdef double acc, diff
    for i in range(n):
        for j in range(i + 1, n):
            acc = 0.0
            for k in range(d):
                diff = xv[i, k] - xv[j, k]
                acc += diff * diff
            out[i, j] = acc
            out[j, i] = acc
    return out_arr


def conditional_affinities(sq_dists, double target_log2_perp, double tol,
                           int max_iter):
    """Per-row bandwidth search so row entropy hits the target (in bits).

    Returns (P, fail_row); see the fallback docstring for the contract.
    """
    cdef const double[:, ::1] dv = np.ascontiguousarray(sq_dists, dtype=np.float64)
    cdef Py_ssize_t n = dv.shape[0]
    p_arr = np.zeros((n, n), dtype=np.float64)
    cdef double[:, ::1] p = p_arr
    shifted_arr = np.empty(n, dtype=np.float64)
    w_arr = np.empty(n, dtype=np.float64)
    cdef double[::1] shifted = shifted_arr
    cdef double[::1] w = w_arr
    cdef Py_ssize_t i, j, it
    cdef double d_min, d_max, beta, beta_lo, beta_hi
    cdef double s, dot, h_bits, diff, ln2 = LN2
    cdef bint ok
    for i in range(n):
        d_min = INFINITY
        d_max = -INFINITY
        for j in range(n):
            if j == i:
                continue
            if dv[i, j] < d_min:
                d_min = dv[i, j]
            if dv[i, j] > d_max:
                d_max = dv[i, j]
        if d_max - d_min <= 1e-12 * max(1.0, d_max):
            for j in range(n):
                if j != i:
                    p[i, j] = 1.0 / (n - 1)
            continue
        for j in range(n):
            shifted[j] = dv[i, j] - d_min
        beta = 1.0
        beta_lo = 0.0
        beta_hi = INFINITY
        ok = False
        for it in range(max_iter):
            s = 0.0
            dot = 0.0
            for j in range(n):
                if j == i:
                    w[j] = 0.0
                    continue
                w[j] = exp(-beta * shifted[j])
                s += w[j]
                dot += shifted[j] * w[j]
            h_bits = (log(s) + beta * dot / s) / ln2
            diff = h_bits - target_log2_perp
            if fabs(diff) <= tol:
                ok = True
                break
            if diff > 0.0:
                beta_lo = beta
                if beta_hi == INFINITY:
                    beta = beta * 2.0
                else:
                    beta = 0.5 * (beta + beta_hi)
            else:
                beta_hi = beta
                beta = 0.5 * (beta + beta_lo)
        if not ok:
            return p_arr, i
        for j in range(n):
            if j != i:
                p[i, j] = w[j] / s
    return p_arr, -1


def tsne_grad_kl(p, y, double exaggeration):
    """Gradient of KL(exaggeration*P || Q) at coords y, plus the true KL."""
    cdef const double[:, ::1] pv = np.ascontiguousarray(p, dtype=np.float64)
    cdef const double[:, ::1] yv = np.ascontiguousarray(y, dtype=np.float64)
    cdef Py_ssize_t n = yv.shape[0]
    num_arr = np.zeros((n, n), dtype=np.float64)
    grad_arr = np.zeros((n, 2), dtype=np.float64)
    cdef double[:, ::1] num = num_arr
    cdef double[:, ::1] grad = grad_arr
    cdef Py_ssize_t i, j
    cdef double dx, dy, z = 0.0, q, wij, kl = 0.0
    for i in range(n):
        for j in range(i + 1, n):
            dx = yv[i, 0] - yv[j, 0]
            dy = yv[i, 1] - yv[j, 1]
            wij = 1.0 / (1.0 + dx * dx + dy * dy)
            num[i, j] = wij
            num[j, i] = wij
            z += 2.0 * wij
    for i in range(n):
        for j in range(n):
            if j == i:
                continue
            q = num[i, j] / z
            wij = (exaggeration * pv[i, j] - q) * num[i, j]
            dx = yv[i, 0] - yv[j, 0]
            dy = yv[i, 1] - yv[j, 1]
            grad[i, 0] += 4.0 * wij * dx
            grad[i, 1] += 4.0 * wij * dy
            if pv[i, j] > 0.0:
                kl += pv[i, j] * (log(pv[i, j]) - log(q))
    return grad_arr, kl
