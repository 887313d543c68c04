"""Blind mutual-information estimation from received samples alone.

The receiver sees only complex samples and the transmitted symbol indices;
no channel model is assumed.  A 2-D histogram whose bin counts maximise a
Bayesian piecewise-constant-density posterior (Knuth's rule, extended to two
dimensions) turns the samples into conditional and unconditional pmfs, and
the MI follows from the discrete identity
I = sum_m sum_cells p(m) p(cell|m) log2( p(cell|m) / p(cell) ).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln

from . import _kernels
from .constellation import SymbolBlock

__all__ = [
    "ConsistencyError",
    "InsufficientDataError",
    "BinGrid",
    "MiEstimate",
    "knuth_log_posterior",
    "select_bins",
    "histogram_2d",
    "estimate_mi",
]

_LGAMMA_HALF = float(gammaln(0.5))


class ConsistencyError(ValueError):
    """Histogram counts disagree with the stated sample count."""


class InsufficientDataError(ValueError):
    """The sample block cannot support the requested estimate."""


@dataclass(frozen=True)
class BinGrid:
    """Equal-width 2-D histogram grid over the I and Q axes.

    ``edges_i``/``edges_q`` are the nb+1 bin edges per axis (uniformly
    spaced, spanning the data range).  Bins are right-open except the last,
    which is right-closed; samples outside the edges are clamped into the
    boundary bins.
    """

    nb_i: int
    nb_q: int
    edges_i: np.ndarray
    edges_q: np.ndarray

    def __post_init__(self) -> None:
        if self.nb_i < 1 or self.nb_q < 1:
            raise ValueError("bin counts must be >= 1")
        if len(self.edges_i) != self.nb_i + 1 or len(self.edges_q) != self.nb_q + 1:
            raise ValueError("edge arrays must have nb + 1 entries")


@dataclass(frozen=True)
class MiEstimate:
    """Histogram MI estimate plus the grid and diagnostics that produced it."""

    bits_per_symbol: float
    grid: BinGrid
    n_symbols: int
    empty_bin_fraction: float


def _bin_indices(values: np.ndarray, lo: float, hi: float, nb: int) -> np.ndarray:
    """Bin index per value under the equal-width rule used everywhere here.

    idx = clip(floor((v - lo)/(hi - lo) * nb), 0, nb-1): right-open bins,
    last bin right-closed, out-of-range values clamped to the edge bins.
    A zero-width range maps every value to bin 0.
    """
    if hi <= lo:
        return np.zeros(len(values), dtype=np.int64)
    s = (values - lo) / (hi - lo)
    return np.clip((s * nb).astype(np.int64), 0, nb - 1)


def _uniform_grid(lo_i: float, hi_i: float, lo_q: float, hi_q: float,
                  nb_i: int, nb_q: int) -> BinGrid:
    return BinGrid(
        nb_i=nb_i,
        nb_q=nb_q,
        edges_i=np.linspace(lo_i, hi_i, nb_i + 1),
        edges_q=np.linspace(lo_q, hi_q, nb_q + 1),
    )


def knuth_log_posterior(counts: np.ndarray, n_s: int) -> float:
    """Log posterior (up to a constant) of a 2-D equal-width histogram model.

    With N_b = nb_i * nb_q total cells and cell counts n_kl summing to N_s:

        N_s ln N_b + lnG(N_b/2) - N_b lnG(1/2) - lnG(N_s + N_b/2)
        + sum_kl lnG(n_kl + 1/2)

    Larger is better; the 1x1 grid scores exactly 0.
    """
    arr = np.asarray(counts)
    if arr.ndim != 2:
        raise ValueError(f"counts must be 2-D, got {arr.ndim}-D")
    if np.any(arr < 0):
        raise ConsistencyError("counts must be non-negative")
    if int(arr.sum()) != n_s:
        raise ConsistencyError(f"counts sum to {int(arr.sum())}, expected {n_s}")
    nb = arr.size
    return float(
        n_s * np.log(nb)
        + gammaln(nb / 2.0)
        - nb * _LGAMMA_HALF
        - gammaln(n_s + nb / 2.0)
        + gammaln(arr + 0.5).sum()
    )


def _index_stack(values: np.ndarray, lo: float, hi: float, nb_max: int) -> np.ndarray:
    """Bin indices of every sample for every candidate count 1..nb_max."""
    n = len(values)
    out = np.empty((nb_max, n), dtype=np.int32)
    if hi <= lo:
        out[:] = 0
        return out
    s = (values - lo) / (hi - lo)
    for a in range(1, nb_max + 1):
        out[a - 1] = np.clip((s * a).astype(np.int64), 0, a - 1)
    return out


def select_bins(block: SymbolBlock, nb_max: int = 60) -> BinGrid:
    """Posterior-optimal bin counts by exhaustive search over 1..nb_max^2.

    Ties break toward smaller nb_i, then smaller nb_q.  A dimension whose
    samples are all identical has zero width and admits only a single bin.
    """
    if nb_max < 1:
        raise ValueError(f"nb_max must be >= 1, got {nb_max}")
    n = len(block)
    if n < 2:
        raise InsufficientDataError(f"need at least 2 samples, got {n}")
    u = np.ascontiguousarray(block.rx.real)
    v = np.ascontiguousarray(block.rx.imag)
    lo_u, hi_u = float(u.min()), float(u.max())
    lo_v, hi_v = float(v.min()), float(v.max())

    iu = _index_stack(u, lo_u, hi_u, nb_max)
    iv = _index_stack(v, lo_v, hi_v, nb_max)
    lg = gammaln(np.arange(n + 1) + 0.5)
    s_table = _kernels.occupancy_loggamma_table(iu, iv, lg)

    ab = np.arange(1, nb_max + 1)
    nb = ab[:, None] * ab[None, :]  # total cells per candidate pair
    post = (
        n * np.log(nb)
        + gammaln(nb / 2.0)
        - nb * _LGAMMA_HALF
        - gammaln(n + nb / 2.0)
        + s_table
    )
    if hi_u <= lo_u:
        post[1:, :] = -np.inf
    if hi_v <= lo_v:
        post[:, 1:] = -np.inf
    best = int(np.argmax(post))  # row-major first max: smallest nb_i, then nb_q
    nb_i = best // nb_max + 1
    nb_q = best % nb_max + 1
    return _uniform_grid(lo_u, hi_u, lo_v, hi_v, nb_i, nb_q)


def histogram_2d(
    block: SymbolBlock, grid: BinGrid, condition: int | None = None
) -> np.ndarray:
    """Sample counts per grid cell, optionally restricted to one tx symbol.

    Returns an (nb_i, nb_q) int64 matrix.  The grid must be equal-width
    (as produced by select_bins); samples outside the edges are clamped
    into the boundary bins.
    """
    for edges in (grid.edges_i, grid.edges_q):
        uniform = np.linspace(edges[0], edges[-1], len(edges))
        if not np.allclose(edges, uniform, rtol=0.0, atol=1e-9 * max(1.0, abs(edges[-1] - edges[0]))):
            raise ValueError("histogram_2d requires equal-width bin edges")
    rx = block.rx
    if condition is not None:
        rx = rx[block.tx_indices == condition]
    ii = _bin_indices(rx.real, float(grid.edges_i[0]), float(grid.edges_i[-1]), grid.nb_i)
    qq = _bin_indices(rx.imag, float(grid.edges_q[0]), float(grid.edges_q[-1]), grid.nb_q)
    flat = np.bincount(ii * grid.nb_q + qq, minlength=grid.nb_i * grid.nb_q)
    return flat.reshape(grid.nb_i, grid.nb_q).astype(np.int64)


def estimate_mi(
    block: SymbolBlock,
    m_order: int,
    nb_max: int = 60,
    bins: tuple[int, int] | None = None,
) -> MiEstimate:
    """Blind MI estimate in bits/symbol from one block of received samples.

    Selects the histogram grid from the unconditional samples (or uses the
    forced ``bins`` pair), then forms the unconditional pmf and one
    conditional pmf per transmitted symbol on the same grid and evaluates
    the discrete MI with uniform symbol probabilities 1/m_order.  Cells in
    which a pmf is zero are skipped (their contribution has a zero factor or
    an undefined log).
    """
    n = len(block)
    if m_order < 2:
        raise ValueError(f"m_order must be >= 2, got {m_order}")
    if n < 2:
        raise InsufficientDataError(f"need at least 2 samples, got {n}")
    tx = np.asarray(block.tx_indices)
    if tx.min() < 0 or tx.max() >= m_order:
        raise ValueError("tx indices out of range for m_order")
    class_counts = np.bincount(tx, minlength=m_order)
    if np.any(class_counts == 0):
        missing = int(np.argmin(class_counts))
        raise InsufficientDataError(
            f"symbol {missing} never transmitted; every class must appear"
        )

    if bins is not None:
        nb_i, nb_q = bins
        if nb_i < 1 or nb_q < 1:
            raise ValueError("forced bin counts must be >= 1")
        u, v = block.rx.real, block.rx.imag
        grid = _uniform_grid(
            float(u.min()), float(u.max()), float(v.min()), float(v.max()), nb_i, nb_q
        )
    else:
        grid = select_bins(block, nb_max=nb_max)

    ii = _bin_indices(block.rx.real, float(grid.edges_i[0]), float(grid.edges_i[-1]), grid.nb_i)
    qq = _bin_indices(block.rx.imag, float(grid.edges_q[0]), float(grid.edges_q[-1]), grid.nb_q)
    flat = ii * grid.nb_q + qq
    ncells = grid.nb_i * grid.nb_q
    counts = np.bincount(flat, minlength=ncells)
    p_y = counts / n

    mi = 0.0
    for m in range(m_order):
        cm = np.bincount(flat[tx == m], minlength=ncells)
        occupied = cm > 0  # p_y > 0 wherever cm > 0, both logs defined
        p_c = cm[occupied] / class_counts[m]
        mi += float(np.sum(p_c * np.log2(p_c / p_y[occupied])))
    mi /= m_order

    return MiEstimate(
        bits_per_symbol=mi,
        grid=grid,
        n_symbols=n,
        empty_bin_fraction=float(np.mean(counts == 0)),
    )
