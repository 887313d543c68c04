"""Exact mutual information of discrete inputs over the reference channels.

Two independent routes: a Monte-Carlo expectation of the information density
(works with and without phase noise) and a 2-D Gauss-Hermite quadrature
(additive noise only).  Both assume uniformly distributed input symbols.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels
from .channels import PcawgnParams, apply_pcawgn
from .constellation import Constellation, SymbolBlock

__all__ = [
    "DegenerateDensityError",
    "MiValue",
    "QuadratureSpec",
    "awgn_capacity",
    "pcawgn_transition_pdf",
    "exact_mi_monte_carlo",
    "exact_mi_awgn_quadrature",
]


class DegenerateDensityError(ValueError):
    """The transition density does not exist (zero additive noise)."""


@dataclass(frozen=True)
class MiValue:
    """A mutual information value in bits/symbol with its computation route."""

    bits_per_symbol: float
    method: str  # 'closed_form' | 'quadrature' | 'monte_carlo'
    std_error: float = 0.0


@dataclass(frozen=True)
class QuadratureSpec:
    """Numerical settings for the exact-MI routes.

    n_phi: phase-integral nodes (uniform trapezoid over [-pi, pi); the
    integrand is periodic, so the rule converges spectrally).
    k_wrap: wrapped-Gaussian replicas summed over k = -k_wrap..k_wrap.
    n_mc: Monte-Carlo sample count.
    """

    n_phi: int = 512
    k_wrap: int = 5
    n_mc: int = 200_000

    def __post_init__(self) -> None:
        if self.n_phi < 64:
            raise ValueError(f"n_phi must be >= 64, got {self.n_phi}")
        if self.k_wrap < 3:
            raise ValueError(f"k_wrap must be >= 3, got {self.k_wrap}")
        if self.n_mc < 10_000:
            raise ValueError(f"n_mc must be >= 10000, got {self.n_mc}")


def awgn_capacity(snr_db: float) -> float:
    """Shannon capacity log2(1 + SNR) of the complex AWGN channel, bits/symbol."""
    return float(np.log2(1.0 + 10.0 ** (snr_db / 10.0)))


def _phase_nodes(sigma_phi2: float, q: QuadratureSpec) -> tuple[np.ndarray, np.ndarray]:
    """Trapezoid nodes over one period and weights coef_j = h * w(phi_j).

    w is the wrapped-Gaussian density, truncated at +-k_wrap replicas (the
    tail beyond |k| = 1 is already negligible for sigma_phi2 <= 0.1).
    """
    h = 2.0 * np.pi / q.n_phi
    phi = -np.pi + h * np.arange(q.n_phi)
    k = np.arange(-q.k_wrap, q.k_wrap + 1)
    shifted = phi[:, None] - 2.0 * np.pi * k[None, :]
    w = np.exp(-(shifted**2) / (2.0 * sigma_phi2)).sum(axis=1)
    w /= np.sqrt(2.0 * np.pi * sigma_phi2)
    return phi, h * w


def _resolvable_sigma_phi2(sigma_phi2: float, q: QuadratureSpec) -> float:
    """Phase-noise variance as resolvable by the phase quadrature.

    The periodic trapezoid rule samples the wrapped Gaussian at spacing
    h = 2 pi / n_phi; its aliasing error scales like exp(-n_phi^2 *
    sigma_phi2 / 2), negligible once the phase std exceeds ~1.5 h but
    catastrophic below ~0.5 h, where the grid steps over the spike
    entirely.  A phase std under 1.5 node spacings is indistinguishable
    from a point mass at the grid's own resolution, so the zero-variance
    closed form is the more accurate evaluation there and is used
    instead.
    """
    h = 2.0 * np.pi / q.n_phi
    return 0.0 if np.sqrt(sigma_phi2) < 1.5 * h else sigma_phi2


def pcawgn_transition_pdf(
    y: np.ndarray | complex,
    x: complex,
    params: PcawgnParams,
    q: QuadratureSpec = QuadratureSpec(),
) -> np.ndarray | float:
    """Transition density p(y|x) of the phase-noise AWGN channel.

    With sigma_phi2 == 0 this is the circular Gaussian
    (1/(pi N0)) exp(-|y - x|^2 / N0); otherwise the Gaussian is averaged over
    the wrapped-Gaussian phase rotation by numerical integration.  Variances
    too small for the phase grid to resolve (see _resolvable_sigma_phi2) are
    evaluated in the closed form.
    """
    if params.n0 <= 0.0:
        raise DegenerateDensityError("n0 must be positive for a density to exist")
    y_arr = np.asarray(y, dtype=np.complex128)
    scalar = y_arr.ndim == 0
    y_arr = np.atleast_1d(y_arr)
    inv_n0 = 1.0 / params.n0
    sigma_phi2 = _resolvable_sigma_phi2(params.sigma_phi2, q)
    if sigma_phi2 == 0.0:
        pdf = np.exp(-np.abs(y_arr - x) ** 2 * inv_n0) * (inv_n0 / np.pi)
    else:
        phi, coef = _phase_nodes(sigma_phi2, q)
        centers = x * np.exp(1j * phi)
        d2 = np.abs(y_arr[:, None] - centers[None, :]) ** 2
        pdf = (np.exp(-d2 * inv_n0) @ coef) * (inv_n0 / np.pi)
    return float(pdf[0]) if scalar else pdf


def exact_mi_monte_carlo(
    c: Constellation,
    params: PcawgnParams,
    rng: np.random.Generator,
    q: QuadratureSpec = QuadratureSpec(),
) -> MiValue:
    """MI by Monte-Carlo expectation of the information density.

    Draws (x_i, y_i) through the channel with uniform symbols and averages
    log2( p(y_i|x_i) / mean_m p(y_i|x_m) ).  The reported std_error is the
    standard error of the sample mean.
    """
    if params.n0 <= 0.0:
        raise DegenerateDensityError("n0 must be positive for a density to exist")
    tx = rng.integers(0, c.order, size=q.n_mc)
    block = apply_pcawgn(SymbolBlock(tx, c.points[tx]), c, params, rng)

    sigma_phi2 = _resolvable_sigma_phi2(params.sigma_phi2, q)
    if sigma_phi2 == 0.0:
        centers = c.points[:, None]
        coef = np.ones(1)
    else:
        phi, coef = _phase_nodes(sigma_phi2, q)
        centers = c.points[:, None] * np.exp(1j * phi)[None, :]
    t = _kernels.mixture_mi_terms(
        np.ascontiguousarray(block.rx.real),
        np.ascontiguousarray(block.rx.imag),
        tx.astype(np.int64),
        np.ascontiguousarray(centers.real),
        np.ascontiguousarray(centers.imag),
        np.ascontiguousarray(coef),
        1.0 / params.n0,
    )
    std_error = float(np.std(t) / np.sqrt(len(t)))
    return MiValue(float(np.mean(t)), "monte_carlo", std_error)


def exact_mi_awgn_quadrature(
    c: Constellation, snr_db: float, n_nodes: int = 48
) -> MiValue:
    """MI over AWGN by 2-D Gauss-Hermite quadrature (deterministic).

    Uses I = log2 M - (1/(M pi)) sum_m E[ log2 sum_k exp(...) ] where the
    inner log argument lies in [1, M], making the evaluation overflow-free.
    """
    n0 = 10.0 ** (-snr_db / 10.0)  # Es = 1 by construction
    t, w = np.polynomial.hermite.hermgauss(n_nodes)
    noise = np.sqrt(n0) * (t[:, None] + 1j * t[None, :])  # (a, b) grid
    w2 = w[:, None] * w[None, :]
    m_ord = c.order
    acc = 0.0
    for m in range(m_ord):
        # d[k, a, b] = |x_m - x_k + n_ab|^2 - |n_ab|^2, so the k = m term is 0
        diff = c.points[m] - c.points  # (k,)
        d = np.abs(diff[:, None, None] + noise[None, :, :]) ** 2
        d -= np.abs(noise)[None, :, :] ** 2
        inner = np.log2(np.exp(-d / n0).sum(axis=0))
        acc += float((w2 * inner).sum())
    mi = np.log2(m_ord) - acc / (m_ord * np.pi)
    return MiValue(float(mi), "quadrature")
