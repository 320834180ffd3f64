# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled kernel for the two-table loss recursion.

Same contract as ``_recursion_py.alpha_beta_forward``.  The loop skips the
(h, k) region that is identically zero after m names (h beyond the
cumulative loss units, or h + k beyond them), which roughly halves the work
relative to the dense update.
"""
import numpy as np

cimport numpy as cnp

cnp.import_array()

BACKEND = "cython"


def alpha_beta_forward(double[::1] p, double[::1] u, double[::1] v, cnp.int64_t[::1] d):
    cdef Py_ssize_t n = p.shape[0]
    cdef Py_ssize_t j, h, k, dj, reach, row
    cdef cnp.int64_t total = 0
    for j in range(n):
        total += d[j]
    cdef Py_ssize_t size = total + 1

    alpha_arr = np.zeros((size, size))
    beta_arr = np.zeros((size, size))
    alpha_prev_arr = np.zeros((size, size))
    beta_prev_arr = np.zeros((size, size))
    cdef double[:, ::1] alpha = alpha_arr
    cdef double[:, ::1] beta = beta_arr
    cdef double[:, ::1] alpha_prev = alpha_prev_arr
    cdef double[:, ::1] beta_prev = beta_prev_arr
    cdef double[:, ::1] tmp

    alpha_prev[0, 0] = 1.0

    cdef double pj, uj, vj, stay, expose, hit_quiet, hit_spread, a_val, b_val
    reach = 0
    for j in range(n):
        pj = p[j]
        uj = u[j]
        vj = v[j]
        dj = d[j]
        reach += dj
        stay = (1.0 - pj) * uj
        expose = (1.0 - pj) * (1.0 - uj)
        hit_quiet = pj * (1.0 - vj)
        hit_spread = pj * vj
        for h in range(reach + 1):
            row = reach - h
            for k in range(row + 1):
                a_val = stay * alpha_prev[h, k]
                b_val = stay * beta_prev[h, k]
                if k >= dj:
                    a_val += expose * alpha_prev[h, k - dj]
                    b_val += expose * beta_prev[h, k - dj]
                if h >= dj:
                    a_val += hit_quiet * alpha_prev[h - dj, k]
                    b_val += pj * beta_prev[h - dj, k] + hit_spread * alpha_prev[h - dj, k]
                alpha[h, k] = a_val
                beta[h, k] = b_val
        tmp = alpha_prev
        alpha_prev = alpha
        alpha = tmp
        tmp = beta_prev
        beta_prev = beta
        beta = tmp

    # results live in the *_prev views after the final swap
    if n % 2 == 1:
        return alpha_arr, beta_arr
    return alpha_prev_arr, beta_prev_arr
