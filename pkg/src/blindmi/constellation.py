"""Square QAM constellations, bit mapping, and hard-decision metrics."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq
from scipy.special import erfc

__all__ = [
    "InvalidOrderError",
    "Constellation",
    "BitSequence",
    "SymbolBlock",
    "build_qam",
    "generate_bits",
    "map_bits",
    "indices_to_bits",
    "hard_decide",
    "bit_error_rate",
    "inverse_erfc",
    "q2_from_ber",
]


class InvalidOrderError(ValueError):
    """Modulation order is not a square power of two."""


@dataclass(frozen=True)
class Constellation:
    """Unit-average-energy constellation with per-point binary labels.

    ``labels[i]`` is the bit pattern (MSB first) carried by ``points[i]``;
    ``bits_per_symbol = log2(order)``.
    """

    points: np.ndarray
    labels: np.ndarray
    order: int

    @property
    def bits_per_symbol(self) -> int:
        return int(np.log2(self.order))


@dataclass(frozen=True)
class BitSequence:
    """Bits as a uint8 array of 0/1 values, tagged with the generating seed."""

    bits: np.ndarray
    seed: int | None = None

    def __len__(self) -> int:
        return len(self.bits)


@dataclass
class SymbolBlock:
    """Aligned transmitted indices and received complex samples."""

    tx_indices: np.ndarray
    rx: np.ndarray

    def __post_init__(self) -> None:
        if len(self.tx_indices) != len(self.rx):
            raise ValueError("tx_indices and rx must have equal length")

    def __len__(self) -> int:
        return len(self.rx)


def _gray(n: int) -> int:
    return n ^ (n >> 1)


def build_qam(order: int) -> Constellation:
    """Build a Gray-labelled square QAM constellation with unit mean energy.

    The I and Q axes are Gray-coded independently; a point's label is the
    concatenation of its I-axis bits (first) and Q-axis bits.  Raises
    InvalidOrderError unless ``order`` is an even power of two (4, 16, 64...).
    """
    if order < 4 or (order & (order - 1)) != 0:
        raise InvalidOrderError(f"order must be a power of two >= 4, got {order}")
    side = int(round(np.sqrt(order)))
    if side * side != order:
        raise InvalidOrderError(f"order must be a perfect square, got {order}")
    bits_axis = int(np.log2(side))

    # Amplitude levels -(side-1), ..., -1, 1, ..., side-1 in steps of 2;
    # level index g (Gray code of the axis bits) maps to 2g - (side-1).
    levels = np.arange(side) * 2.0 - (side - 1)
    gray_of_pos = np.array([_gray(i) for i in range(side)])
    # pos_of_gray[g] = grid position whose Gray code is g
    pos_of_gray = np.argsort(gray_of_pos)

    points = np.empty(order, dtype=np.complex128)
    labels = np.empty((order, 2 * bits_axis), dtype=np.uint8)
    for idx in range(order):
        g_i, g_q = divmod(idx, side)  # label value split into axis halves
        i_pos = pos_of_gray[g_i]
        q_pos = pos_of_gray[g_q]
        points[idx] = levels[i_pos] + 1j * levels[q_pos]
        bit_str = np.binary_repr(idx, width=2 * bits_axis)
        labels[idx] = np.frombuffer(bit_str.encode(), dtype=np.uint8) - ord("0")

    # Normalise to unit average energy; for square QAM the mean power of the
    # integer grid is 2(side^2 - 1)/3 (e.g. 10 for 16-QAM).
    points /= np.sqrt(np.mean(np.abs(points) ** 2))
    return Constellation(points=points, labels=labels, order=order)


def generate_bits(seed: int, n_bits: int) -> BitSequence:
    """Deterministic uniform bits from a seeded PCG64 generator."""
    if n_bits < 0:
        raise ValueError("n_bits must be non-negative")
    rng = np.random.default_rng(seed)
    bits = rng.integers(0, 2, size=n_bits, dtype=np.uint8)
    return BitSequence(bits=bits, seed=seed)


def _label_to_index(c: Constellation) -> np.ndarray:
    """Inverse labelling: value of the label bits -> constellation index."""
    weights = 1 << np.arange(c.labels.shape[1] - 1, -1, -1)
    values = (c.labels * weights).sum(axis=1)
    inv = np.empty(c.order, dtype=np.int64)
    inv[values] = np.arange(c.order)
    return inv


def map_bits(bits: BitSequence, c: Constellation) -> SymbolBlock:
    """Map bits (MSB first per symbol) to constellation indices.

    The returned block has ``rx`` initialised to the noiseless points.
    Raises ValueError when the bit count is not a multiple of log2(order).
    """
    k = c.bits_per_symbol
    arr = np.asarray(bits.bits, dtype=np.uint8)
    if len(arr) % k != 0:
        raise ValueError(f"bit count {len(arr)} is not a multiple of {k}")
    groups = arr.reshape(-1, k)
    weights = 1 << np.arange(k - 1, -1, -1)
    values = (groups.astype(np.int64) * weights).sum(axis=1)
    indices = _label_to_index(c)[values]
    return SymbolBlock(tx_indices=indices, rx=c.points[indices].copy())


def indices_to_bits(indices: np.ndarray, c: Constellation) -> BitSequence:
    """Labels of the given constellation indices, concatenated MSB first."""
    return BitSequence(bits=c.labels[np.asarray(indices)].reshape(-1).copy())


def hard_decide(block: SymbolBlock, c: Constellation) -> np.ndarray:
    """Minimum-distance decision; distance ties go to the lowest index."""
    d2 = np.abs(block.rx[:, None] - c.points[None, :]) ** 2
    return np.argmin(d2, axis=1)  # argmin returns the first (lowest) index


def bit_error_rate(tx: BitSequence, rx: BitSequence) -> float:
    """Fraction of differing bit positions between two equal-length sequences."""
    a = np.asarray(tx.bits)
    b = np.asarray(rx.bits)
    if len(a) != len(b):
        raise ValueError("bit sequences must have equal length")
    if len(a) == 0:
        raise ValueError("bit sequences must be non-empty")
    return float(np.mean(a != b))


def inverse_erfc(p: float) -> float:
    """Inverse of erfc on (0, 2), by bracketed root-finding on scipy's erfc.

    The bracket is expanded geometrically until it encloses the root, then
    refined with Brent's method to ~1e-15; |erfc(result) - p| < 1e-12 over
    the library's working range.
    """
    if not 0.0 < p < 2.0:
        raise ValueError(f"p must lie in (0, 2), got {p}")
    if p == 1.0:
        return 0.0
    # erfc is strictly decreasing with erfc(0) = 1, so the root is positive
    # for p < 1 and negative for p > 1; expand the outer end until bracketed.
    if p < 1.0:
        lo, hi = 0.0, 1.0
        while erfc(hi) > p:
            hi *= 2.0
    else:
        lo, hi = -1.0, 0.0
        while erfc(lo) < p:
            lo *= 2.0
    return float(brentq(lambda x: erfc(x) - p, lo, hi, xtol=1e-15, rtol=8.9e-16))


def q2_from_ber(ber: float) -> float:
    """Q^2 factor in dB equivalent to a pre-FEC bit error rate.

    Q^2 = 20 log10( sqrt(2) * erfc^-1(2 * BER) ); valid for 0 < BER < 0.5.
    """
    if not 0.0 < ber < 0.5:
        raise ValueError(f"ber must lie in (0, 0.5), got {ber}")
    return float(20.0 * np.log10(np.sqrt(2.0) * inverse_erfc(2.0 * ber)))
