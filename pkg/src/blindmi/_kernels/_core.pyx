# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled hot loops: candidate-grid occupancy scan and mixture densities.

Both functions have numpy twins in ``_fallback`` with identical signatures
and (up to floating-point summation order) identical results.  The integer
bin indices are always computed by the caller so that compiled and fallback
paths count samples into exactly the same cells.
"""

from libc.math cimport exp, log

import numpy as np

__all__ = ["occupancy_loggamma_table", "mixture_mi_terms"]

LN2 = 0.6931471805599453


def occupancy_loggamma_table(int[:, ::1] iu, int[:, ::1] iv, double[::1] lg):
    """Sum of lg[count] over the cells of every candidate 2-D grid.

    ``iu[a-1, i]`` / ``iv[b-1, i]`` are the per-dimension bin indices of
    sample ``i`` for ``a`` (resp. ``b``) bins; ``lg[k]`` is a lookup table
    evaluated at integer occupation numbers ``k = 0 .. n``.  Returns the
    (nb_max, nb_max) matrix ``S[a-1, b-1] = sum_cells lg[n_cell]``.
    """
    cdef Py_ssize_t nb_max = iu.shape[0]
    cdef Py_ssize_t n = iu.shape[1]
    cdef Py_ssize_t a, b, i, c, ncells
    cdef double acc
    out = np.empty((nb_max, nb_max), dtype=np.float64)
    buf_arr = np.zeros(nb_max * nb_max, dtype=np.int64)
    cdef double[:, ::1] s = out
    cdef long long[::1] buf = buf_arr
    cdef const int[::1] rowu
    cdef const int[::1] rowv
    for a in range(1, nb_max + 1):
        rowu = iu[a - 1]
        for b in range(1, nb_max + 1):
            rowv = iv[b - 1]
            ncells = a * b
            for c in range(ncells):
                buf[c] = 0
            for i in range(n):
                buf[rowu[i] * b + rowv[i]] += 1
            acc = 0.0
            for c in range(ncells):
                acc += lg[buf[c]]
            s[a - 1, b - 1] = acc
    return out


def mixture_mi_terms(double[::1] yr, double[::1] yi, long long[::1] tx,
                     double[:, ::1] cr, double[:, ::1] ci,
                     double[::1] coef, double inv_n0):
    """Per-sample information terms for a Gaussian-mixture channel density.

    Component ``(m, j)`` is a circular Gaussian of total variance ``1/inv_n0``
    centred at ``cr[m, j] + 1j*ci[m, j]`` with weight ``coef[j]``; symbol
    ``m`` owns the mixture over ``j``.  Returns, for each received sample,

        t_i = log2( M * s_tx(i) / sum_m s_m(i) )

    where ``s_m(i) = sum_j coef[j] * exp(-|y_i - c_mj|^2 * inv_n0)``.  The
    common normalisation of the density cancels in the ratio.
    """
    cdef Py_ssize_t n = yr.shape[0]
    cdef Py_ssize_t m_ord = cr.shape[0]
    cdef Py_ssize_t nj = cr.shape[1]
    cdef Py_ssize_t i, m, j
    cdef double a, b, dr, di, s_m, s_sum, s_num
    cdef double log_m = log(<double> m_ord)
    out = np.empty(n, dtype=np.float64)
    cdef double[::1] t = out
    for i in range(n):
        a = yr[i]
        b = yi[i]
        s_sum = 0.0
        s_num = 0.0
        for m in range(m_ord):
            s_m = 0.0
            for j in range(nj):
                dr = a - cr[m, j]
                di = b - ci[m, j]
                s_m += coef[j] * exp(-(dr * dr + di * di) * inv_n0)
            s_sum += s_m
            if m == tx[i]:
                s_num = s_m
        t[i] = (log_m + log(s_num) - log(s_sum)) / LN2
    return out
