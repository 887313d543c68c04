"""Memoryless reference channels: AWGN and AWGN plus wrapped-Gaussian phase noise."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .constellation import Constellation, SymbolBlock

__all__ = [
    "PcawgnParams",
    "snr_to_n0",
    "sample_wrapped_gaussian",
    "apply_pcawgn",
    "apply_awgn",
]


@dataclass(frozen=True)
class PcawgnParams:
    """Total additive noise variance N0 and phase-noise variance sigma_phi^2."""

    n0: float
    sigma_phi2: float = 0.0

    def __post_init__(self) -> None:
        if not (np.isfinite(self.n0) and self.n0 >= 0.0):
            raise ValueError(f"n0 must be finite and >= 0, got {self.n0}")
        if not (np.isfinite(self.sigma_phi2) and self.sigma_phi2 >= 0.0):
            raise ValueError(
                f"sigma_phi2 must be finite and >= 0, got {self.sigma_phi2}"
            )


def snr_to_n0(snr_db: float, es: float = 1.0) -> float:
    """Total complex noise variance for a per-polarization SNR = Es/N0 in dB."""
    if not np.isfinite(snr_db):
        raise ValueError(f"snr_db must be finite, got {snr_db}")
    return es / 10.0 ** (snr_db / 10.0)


def sample_wrapped_gaussian(
    sigma_phi2: float, rng: np.random.Generator, size: int
) -> np.ndarray:
    """Zero-mean Gaussian phases of variance sigma_phi2 wrapped into [-pi, pi)."""
    if sigma_phi2 < 0.0:
        raise ValueError(f"sigma_phi2 must be >= 0, got {sigma_phi2}")
    if sigma_phi2 == 0.0:
        return np.zeros(size)
    phi = rng.normal(0.0, np.sqrt(sigma_phi2), size)
    return np.mod(phi + np.pi, 2.0 * np.pi) - np.pi


def apply_pcawgn(
    block: SymbolBlock,
    c: Constellation,
    params: PcawgnParams,
    rng: np.random.Generator,
) -> SymbolBlock:
    """Y = X e^{j Phi} + N with N circular complex Gaussian of variance N0.

    Phases are drawn first (skipped entirely when sigma_phi2 == 0), then the
    additive noise, so the sigma_phi2 == 0 case consumes exactly the same
    generator stream as a plain AWGN channel.
    """
    x = c.points[block.tx_indices]
    n = len(x)
    if params.sigma_phi2 > 0.0:
        phi = sample_wrapped_gaussian(params.sigma_phi2, rng, n)
        x = x * np.exp(1j * phi)
    if params.n0 > 0.0:
        sigma = np.sqrt(params.n0 / 2.0)  # per real dimension
        noise = rng.normal(0.0, sigma, n) + 1j * rng.normal(0.0, sigma, n)
        x = x + noise
    return SymbolBlock(tx_indices=block.tx_indices.copy(), rx=np.asarray(x, np.complex128))


def apply_awgn(
    block: SymbolBlock, c: Constellation, snr_db: float, rng: np.random.Generator
) -> SymbolBlock:
    """AWGN channel at the given per-polarization SNR; no phase noise."""
    params = PcawgnParams(n0=snr_to_n0(snr_db), sigma_phi2=0.0)
    return apply_pcawgn(block, c, params, rng)
