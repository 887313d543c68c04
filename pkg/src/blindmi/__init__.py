"""Blind mutual-information estimation over optical-grade channels.

Estimates MI directly from received constellation samples via
posterior-optimal 2-D histograms, verifies the estimator against exactly
computed MI on reference channels, and applies it as the figure of merit of
a simulated coherent WDM fiber link.
"""

from ._kernels import BACKEND as KERNEL_BACKEND
from .channels import PcawgnParams, apply_awgn, apply_pcawgn, snr_to_n0
from .constellation import (
    BitSequence,
    Constellation,
    SymbolBlock,
    bit_error_rate,
    build_qam,
    generate_bits,
    hard_decide,
    indices_to_bits,
    inverse_erfc,
    map_bits,
    q2_from_ber,
)
from .exact_mi import (
    MiValue,
    QuadratureSpec,
    awgn_capacity,
    exact_mi_awgn_quadrature,
    exact_mi_monte_carlo,
    pcawgn_transition_pdf,
)
from .fiber import (
    ConfigurationError,
    FiberParams,
    LinkConfig,
    SampledSignal,
    simulate_link,
)
from .hist_mi import BinGrid, MiEstimate, estimate_mi, histogram_2d, knuth_log_posterior, select_bins

__version__ = "0.1.0"

__all__ = [
    "KERNEL_BACKEND",
    "PcawgnParams",
    "apply_awgn",
    "apply_pcawgn",
    "snr_to_n0",
    "BitSequence",
    "Constellation",
    "SymbolBlock",
    "bit_error_rate",
    "build_qam",
    "generate_bits",
    "hard_decide",
    "indices_to_bits",
    "inverse_erfc",
    "map_bits",
    "q2_from_ber",
    "MiValue",
    "QuadratureSpec",
    "awgn_capacity",
    "exact_mi_awgn_quadrature",
    "exact_mi_monte_carlo",
    "pcawgn_transition_pdf",
    "ConfigurationError",
    "FiberParams",
    "LinkConfig",
    "SampledSignal",
    "simulate_link",
    "BinGrid",
    "MiEstimate",
    "estimate_mi",
    "histogram_2d",
    "knuth_log_posterior",
    "select_bins",
    "__version__",
]
