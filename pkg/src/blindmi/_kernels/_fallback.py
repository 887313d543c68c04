"""Pure-numpy implementations of the hot kernels.

Signature-compatible with the compiled ``_core`` extension; used when the
extension is unavailable or disabled via ``BLINDMI_NO_EXT=1``.
"""

import numpy as np

__all__ = ["occupancy_loggamma_table", "mixture_mi_terms"]

# Samples per chunk in mixture_mi_terms; keeps the (chunk, n_components)
# temporaries around 64 MB for the default 512-node quadrature.
_CHUNK = 16384


def occupancy_loggamma_table(iu, iv, lg):
    """Sum of lg[count] over the cells of every candidate 2-D grid.

    See the compiled twin for the contract.  One bincount per candidate
    (a, b) pair; the index arrays are shared with the compiled path so the
    counts are bit-identical across backends.
    """
    nb_max, _ = iu.shape
    iu64 = iu.astype(np.int64)
    iv64 = iv.astype(np.int64)
    s = np.empty((nb_max, nb_max), dtype=np.float64)
    for a in range(1, nb_max + 1):
        rowu = iu64[a - 1]
        for b in range(1, nb_max + 1):
            flat = rowu * b + iv64[b - 1]
            counts = np.bincount(flat, minlength=a * b)
            s[a - 1, b - 1] = lg[counts].sum()
    return s


def mixture_mi_terms(yr, yi, tx, cr, ci, coef, inv_n0):
    """Per-sample information terms for a Gaussian-mixture channel density.

    See the compiled twin for the contract.  Chunked over samples; one
    (chunk, n_components) exp per constellation point per chunk.
    """
    n = yr.shape[0]
    m_ord = cr.shape[0]
    t = np.empty(n, dtype=np.float64)
    for start in range(0, n, _CHUNK):
        sl = slice(start, min(start + _CHUNK, n))
        yr_c = yr[sl][:, None]
        yi_c = yi[sl][:, None]
        tx_c = tx[sl]
        s = np.empty((yr_c.shape[0], m_ord), dtype=np.float64)
        for m in range(m_ord):
            dr = yr_c - cr[m][None, :]
            di = yi_c - ci[m][None, :]
            np.square(dr, out=dr)
            np.square(di, out=di)
            dr += di
            dr *= -inv_n0
            np.exp(dr, out=dr)
            s[:, m] = dr @ coef
        s_num = np.take_along_axis(s, tx_c[:, None], axis=1)[:, 0]
        s_sum = s.sum(axis=1)
        t[sl] = (np.log(m_ord) + np.log(s_num) - np.log(s_sum)) / np.log(2.0)
    return t
