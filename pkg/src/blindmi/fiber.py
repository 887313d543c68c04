"""Coherent dual-polarization WDM fiber link, transmitter to receiver.

The whole chain is circular: pulse shaping, frequency shifts, and filtering
all act on one FFT block, so symbol k of the transmitter lands exactly on
sample k*sps at the receiver with no delay bookkeeping.  Propagation is a
symmetric split-step Fourier method with Manakov polarization coupling;
amplification is lumped EDFAs with white ASE over the simulated band.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .constellation import SymbolBlock, build_qam, generate_bits, map_bits

__all__ = [
    "ConfigurationError",
    "FiberParams",
    "SampledSignal",
    "LinkConfig",
    "rrc_taps",
    "upsample_and_shape",
    "wdm_mux",
    "ssfm_span",
    "edfa",
    "bandpass_extract",
    "cd_compensate",
    "dbp_single_channel",
    "matched_filter_downsample",
    "normalize_block",
    "propagate",
    "receive",
    "simulate_link",
]

PLANCK_J_S = 6.62607015e-34
C_M_S = 299792458.0

# Manakov cross-polarization averaging factor for the nonlinear phase.
MANAKOV_FACTOR = 8.0 / 9.0


class ConfigurationError(ValueError):
    """A link configuration that cannot be simulated faithfully."""


@dataclass(frozen=True)
class FiberParams:
    """Standard single-mode fiber span parameters.

    Dispersion slope and PMD are accepted for completeness but must be zero;
    neither effect is modeled.
    """

    alpha_db_per_km: float = 0.2
    gamma_per_w_km: float = 1.3
    dispersion_ps_nm_km: float = 17.0
    dispersion_slope_ps_nm2_km: float = 0.0
    pmd_ps_sqrt_km: float = 0.0
    span_km: float = 100.0
    n_spans: int = 60
    step_km: float = 0.1
    carrier_nm: float = 1550.0

    def __post_init__(self) -> None:
        if self.alpha_db_per_km < 0 or self.gamma_per_w_km < 0:
            raise ConfigurationError("alpha and gamma must be >= 0")
        if self.span_km <= 0 or self.step_km <= 0 or self.n_spans < 1:
            raise ConfigurationError("span_km, step_km, n_spans must be positive")
        if self.carrier_nm <= 0:
            raise ConfigurationError("carrier_nm must be positive")
        if self.dispersion_slope_ps_nm2_km != 0.0:
            raise ConfigurationError("dispersion slope is not modeled; set it to 0")
        if self.pmd_ps_sqrt_km != 0.0:
            raise ConfigurationError("PMD is not modeled; set it to 0")
        steps = self.span_km / self.step_km
        if abs(steps - round(steps)) > 1e-9:
            raise ConfigurationError(
                f"step_km {self.step_km} must divide span_km {self.span_km}"
            )

    @property
    def carrier_freq_hz(self) -> float:
        return C_M_S / (self.carrier_nm * 1e-9)

    @property
    def beta2_s2_per_m(self) -> float:
        """Group-velocity dispersion, beta2 = -D lambda^2 / (2 pi c)."""
        d_si = self.dispersion_ps_nm_km * 1e-6  # s/m^2
        lam = self.carrier_nm * 1e-9
        return -d_si * lam**2 / (2.0 * np.pi * C_M_S)

    @property
    def alpha_np_per_m(self) -> float:
        """Power attenuation in natural-log units per meter."""
        return self.alpha_db_per_km * np.log(10.0) / 10.0 / 1e3

    @property
    def steps_per_span(self) -> int:
        return int(round(self.span_km / self.step_km))


@dataclass
class SampledSignal:
    """Dual-polarization complex baseband signal on a uniform time grid."""

    x_pol: np.ndarray
    y_pol: np.ndarray
    sample_rate: float
    center_freq_offset: float = 0.0

    def __post_init__(self) -> None:
        if len(self.x_pol) != len(self.y_pol):
            raise ValueError("x_pol and y_pol must have equal length")
        if self.sample_rate <= 0:
            raise ValueError("sample_rate must be positive")

    def __len__(self) -> int:
        return len(self.x_pol)

    @property
    def mean_power_w(self) -> float:
        return float(np.mean(np.abs(self.x_pol) ** 2 + np.abs(self.y_pol) ** 2))


@dataclass(frozen=True)
class LinkConfig:
    """Everything needed for one deterministic link realization."""

    modulation_order: int
    launch_power_dbm: float
    n_symbols: int
    baud: float = 28e9
    rolloff: float = 0.05
    sps: int = 32
    wdm_spacing_hz: float = 50e9
    n_wdm_channels: int = 1
    edfa_nf_db: float | None = 4.0  # None disables ASE (noiseless amplifiers)
    fiber: FiberParams = field(default_factory=FiberParams)
    dbp_enabled: bool = False
    polarization_coupled: bool = True  # False: single-pol factor 1 instead of 8/9
    rrc_span_symbols: int = 64
    seed: int = 2026

    def __post_init__(self) -> None:
        if self.n_symbols < 2:
            raise ConfigurationError("n_symbols must be >= 2")
        if self.sps < 2:
            raise ConfigurationError("sps must be >= 2")
        if not 0.0 < self.rolloff < 1.0:
            raise ConfigurationError("rolloff must lie in (0, 1)")
        if self.n_wdm_channels < 1 or self.n_wdm_channels % 2 == 0:
            raise ConfigurationError("n_wdm_channels must be odd and >= 1")
        if self.wdm_spacing_hz <= 0:
            raise ConfigurationError("wdm_spacing_hz must be positive")

    @property
    def sample_rate(self) -> float:
        return self.baud * self.sps

    @property
    def occupied_bandwidth_hz(self) -> float:
        return self.baud * (1.0 + self.rolloff)


def rrc_taps(rolloff: float, span_symbols: int, sps: int) -> np.ndarray:
    """Unit-energy root-raised-cosine impulse response.

    Odd length span_symbols*sps + 1.  The removable singularities at t = 0
    and |t| = T/(4 rolloff) are evaluated by their limits.
    """
    if not 0.0 < rolloff < 1.0:
        raise ValueError("rolloff must lie in (0, 1)")
    if span_symbols < 2 or sps < 1:
        raise ValueError("span_symbols must be >= 2 and sps >= 1")
    n = span_symbols * sps + 1
    t = (np.arange(n) - (n - 1) / 2) / sps  # in symbol periods
    b = rolloff
    h = np.empty(n)

    at_zero = t == 0.0
    at_break = np.isclose(np.abs(t), 1.0 / (4.0 * b))
    regular = ~(at_zero | at_break)

    h[at_zero] = 1.0 - b + 4.0 * b / np.pi
    h[at_break] = (b / np.sqrt(2.0)) * (
        (1.0 + 2.0 / np.pi) * np.sin(np.pi / (4.0 * b))
        + (1.0 - 2.0 / np.pi) * np.cos(np.pi / (4.0 * b))
    )
    tr = t[regular]
    h[regular] = (
        np.sin(np.pi * tr * (1.0 - b)) + 4.0 * b * tr * np.cos(np.pi * tr * (1.0 + b))
    ) / (np.pi * tr * (1.0 - (4.0 * b * tr) ** 2))
    return h / np.sqrt(np.sum(h**2))


def _circular_filter(rows: np.ndarray, taps: np.ndarray) -> np.ndarray:
    """Zero-delay circular convolution of each row with symmetric FIR taps."""
    n = rows.shape[-1]
    if len(taps) > n:
        raise ValueError(f"filter length {len(taps)} exceeds block length {n}")
    h = np.zeros(n)
    h[: len(taps)] = taps
    h = np.roll(h, -((len(taps) - 1) // 2))  # center tap to index 0
    return np.fft.ifft(np.fft.fft(rows, axis=-1) * np.fft.fft(h), axis=-1)


def upsample_and_shape(
    block_x: SymbolBlock,
    block_y: SymbolBlock,
    taps: np.ndarray,
    sps: int,
    baud: float,
    launch_power_dbm: float,
) -> SampledSignal:
    """Zero-stuff both polarizations, pulse-shape, and set the launch power.

    The output mean power (both polarizations together) equals the
    configured launch power exactly; symbol k sits at sample k*sps.
    """
    if len(block_x) != len(block_y):
        raise ValueError("polarizations must carry equally long blocks")
    n = len(block_x) * sps
    up = np.zeros((2, n), dtype=np.complex128)
    up[0, ::sps] = block_x.rx
    up[1, ::sps] = block_y.rx
    shaped = _circular_filter(up, taps)
    p_target = 1e-3 * 10.0 ** (launch_power_dbm / 10.0)
    p_now = np.mean(np.abs(shaped[0]) ** 2 + np.abs(shaped[1]) ** 2)
    shaped *= np.sqrt(p_target / p_now)
    return SampledSignal(shaped[0], shaped[1], sample_rate=baud * sps)


def wdm_mux(
    center: SampledSignal,
    n_channels: int,
    spacing_hz: float,
    sps: int,
    occupied_bandwidth_hz: float,
    rng: np.random.Generator,
    min_shift_symbols: int = 100,
) -> SampledSignal:
    """Surround the center channel with decorrelated frequency-shifted copies.

    Each side channel is the center channel circularly shifted by a
    per-channel symbol offset >= min_shift_symbols (equivalent, for circular
    shaping, to re-shaping a shifted symbol stream) and moved to k*spacing,
    snapped to the nearest FFT bin.  Raises ConfigurationError when the
    band n_channels*spacing + occupied bandwidth does not fit the sample
    rate.
    """
    if n_channels % 2 == 0 or n_channels < 1:
        raise ConfigurationError("n_channels must be odd and >= 1")
    fs = center.sample_rate
    if n_channels * spacing_hz + occupied_bandwidth_hz > fs:
        raise ConfigurationError(
            f"{n_channels} channels at {spacing_hz:.3g} Hz exceed the sampled "
            f"band {fs:.3g} Hz"
        )
    if n_channels == 1:
        return SampledSignal(center.x_pol.copy(), center.y_pol.copy(), fs)

    n = len(center)
    n_sym = n // sps
    if n_sym <= 2 * min_shift_symbols:
        raise ConfigurationError(
            f"{n_sym} symbols cannot absorb decorrelation shifts of "
            f">= {min_shift_symbols}"
        )
    base = np.stack([center.x_pol, center.y_pol])
    total = base.copy()
    half = (n_channels - 1) // 2
    idx = np.arange(n)
    for k in range(-half, half + 1):
        if k == 0:
            continue
        shift = int(rng.integers(min_shift_symbols, n_sym - min_shift_symbols))
        k_bin = int(round(k * spacing_hz * n / fs))  # keep the copy periodic
        tone = np.exp(2j * np.pi * k_bin * idx / n)
        total += np.roll(base, shift * sps, axis=-1) * tone
    return SampledSignal(total[0], total[1], fs)


def _omega(n: int, fs: float) -> np.ndarray:
    return 2.0 * np.pi * np.fft.fftfreq(n, d=1.0 / fs)


def ssfm_span(
    sig: SampledSignal,
    fiber: FiberParams,
    direction: str = "forward",
    nl_factor: float = MANAKOV_FACTOR,
) -> SampledSignal:
    """Propagate one fiber span with the symmetric split-step Fourier method.

    Each step applies a linear half step (dispersion + loss in the frequency
    domain), the full nonlinear phase rotation
    nl_factor * gamma * (|Ax|^2 + |Ay|^2) * h_eff shared by both
    polarizations, and a second linear half step.  The Kerr phase is
    referenced to the step-entry power: the field at the nonlinear point
    already carries the half-step loss, so the effective length is scaled
    by exp(alpha dz / 2); for a CW field the per-step phase is then
    gamma * h_eff * P_entry exactly, independent of step size, and the
    residual step error is the second-order splitting commutator.
    direction='backward' applies the exact elementwise inverse of every
    operator (negated dispersion and nonlinearity, gain instead of loss),
    which makes a backward span undo a forward span to machine precision.
    """
    if direction not in ("forward", "backward"):
        raise ValueError(f"direction must be forward|backward, got {direction}")
    sgn = 1.0 if direction == "forward" else -1.0
    n = len(sig)
    fs = sig.sample_rate
    dz = fiber.step_km * 1e3
    alpha = fiber.alpha_np_per_m
    beta2 = fiber.beta2_s2_per_m
    gamma = fiber.gamma_per_w_km * 1e-3  # 1/(W m)
    h_eff = (1.0 - np.exp(-alpha * dz)) / alpha if alpha > 0 else dz
    h_nl = h_eff * np.exp(0.5 * alpha * dz)  # step-entry power reference

    w2 = _omega(n, fs) ** 2
    # Forward linear factor over dz/2: dispersion phase and field loss.
    half = np.exp(sgn * (-0.5j * beta2 * w2 - 0.5 * alpha) * (dz / 2.0))
    full = half * half

    a = np.stack([sig.x_pol, sig.y_pol])
    steps = fiber.steps_per_span
    a = np.fft.ifft(np.fft.fft(a, axis=-1) * half, axis=-1)
    for step in range(steps):
        phi = nl_factor * gamma * h_nl * (np.abs(a[0]) ** 2 + np.abs(a[1]) ** 2)
        a *= np.exp(sgn * 1j * phi)
        factor = half if step == steps - 1 else full  # merge adjacent halves
        a = np.fft.ifft(np.fft.fft(a, axis=-1) * factor, axis=-1)
    return SampledSignal(a[0], a[1], fs, sig.center_freq_offset)


def edfa(
    sig: SampledSignal,
    gain_db: float,
    nf_db: float | None,
    carrier_freq_hz: float,
    rng: np.random.Generator,
) -> SampledSignal:
    """Flat-gain amplifier with white ASE over the simulated band.

    Per polarization the ASE power spectral density is
    rho = (G - 1) h nu n_sp with n_sp = 10^(NF/10) / 2; complex Gaussian
    noise of total power rho * sample_rate is added per polarization
    (x first, then y).  nf_db=None gives a noiseless amplifier.
    """
    g_lin = 10.0 ** (gain_db / 10.0)
    a = np.stack([sig.x_pol, sig.y_pol]) * np.sqrt(g_lin)
    if nf_db is not None and g_lin > 1.0:
        n_sp = 10.0 ** (nf_db / 10.0) / 2.0
        rho = (g_lin - 1.0) * PLANCK_J_S * carrier_freq_hz * n_sp  # W/Hz/pol
        sigma = np.sqrt(rho * sig.sample_rate / 2.0)  # per quadrature
        n = len(sig)
        for pol in range(2):
            a[pol] += rng.normal(0.0, sigma, n) + 1j * rng.normal(0.0, sigma, n)
    return SampledSignal(a[0], a[1], sig.sample_rate, sig.center_freq_offset)


def bandpass_extract(
    sig: SampledSignal, center_offset_hz: float, bandwidth_hz: float
) -> SampledSignal:
    """Brick-wall select one channel and shift it to baseband.

    The passband [offset - B/2, offset + B/2] is realized on FFT bins; the
    retained spectrum is rolled so the channel center lands on frequency 0.
    """
    n = len(sig)
    fs = sig.sample_rate
    if bandwidth_hz <= 0 or bandwidth_hz > fs:
        raise ConfigurationError("bandwidth must lie in (0, sample_rate]")
    k0 = int(round(center_offset_hz * n / fs))
    half_bins = int(round(bandwidth_hz / 2.0 * n / fs))
    # Signed bin index distance from the channel center, on the FFT circle.
    k = np.fft.fftfreq(n, d=1.0 / n).astype(np.int64)
    dist = (k - k0 + n // 2) % n - n // 2
    mask = np.abs(dist) <= half_bins
    spec = np.fft.fft(np.stack([sig.x_pol, sig.y_pol]), axis=-1)
    spec *= mask
    spec = np.roll(spec, -k0, axis=-1)
    a = np.fft.ifft(spec, axis=-1)
    return SampledSignal(a[0], a[1], fs, 0.0)


def cd_compensate(sig: SampledSignal, fiber: FiberParams, total_km: float) -> SampledSignal:
    """All-pass chromatic dispersion equalizer for the given length."""
    w2 = _omega(len(sig), sig.sample_rate) ** 2
    factor = np.exp(0.5j * fiber.beta2_s2_per_m * w2 * total_km * 1e3)
    a = np.fft.ifft(np.fft.fft(np.stack([sig.x_pol, sig.y_pol]), axis=-1) * factor, axis=-1)
    return SampledSignal(a[0], a[1], sig.sample_rate, sig.center_freq_offset)


def dbp_single_channel(
    sig: SampledSignal,
    fiber: FiberParams,
    launch_power_dbm: float,
    span_gain_db: float,
    nl_factor: float = MANAKOV_FACTOR,
) -> SampledSignal:
    """Digital back-propagation of the extracted channel through every span.

    The input is rescaled to the channel's known launch power, then for each
    span the amplifier gain is undone and the span is run backward (negated
    dispersion and nonlinearity, loss inverted to gain).  Only intra-channel
    effects can be undone; neighbor-channel nonlinearity stays.
    """
    p_target = 1e-3 * 10.0 ** (launch_power_dbm / 10.0)
    scale = np.sqrt(p_target / sig.mean_power_w)
    out = SampledSignal(
        sig.x_pol * scale, sig.y_pol * scale, sig.sample_rate, sig.center_freq_offset
    )
    undo_gain = np.sqrt(10.0 ** (-span_gain_db / 10.0))
    for _ in range(fiber.n_spans):
        out = SampledSignal(
            out.x_pol * undo_gain,
            out.y_pol * undo_gain,
            out.sample_rate,
            out.center_freq_offset,
        )
        out = ssfm_span(out, fiber, direction="backward", nl_factor=nl_factor)
    return out


def matched_filter_downsample(
    sig: SampledSignal, taps: np.ndarray, sps: int
) -> tuple[np.ndarray, np.ndarray]:
    """Matched filter (same real symmetric taps) and symbol-rate decimation.

    The circular zero-delay convention puts symbol k at sample k*sps, so
    decimation starts at sample 0.  Returns one complex symbol array per
    polarization.
    """
    filtered = _circular_filter(np.stack([sig.x_pol, sig.y_pol]), taps)
    return filtered[0, ::sps].copy(), filtered[1, ::sps].copy()


def normalize_block(rx: np.ndarray, tx: np.ndarray) -> np.ndarray:
    """Scale rx by the least-squares complex scalar towards tx.

    a = <rx, tx> / <rx, rx> minimizes ||tx - a rx||^2; a pure gain/phase
    offset is removed exactly.
    """
    if len(rx) != len(tx):
        raise ValueError("rx and tx must have equal length")
    denom = np.vdot(rx, rx)
    if denom == 0:
        raise ValueError("rx has zero power")
    return rx * (np.vdot(rx, tx) / denom)


def propagate(cfg: LinkConfig) -> tuple[SymbolBlock, SymbolBlock, SampledSignal]:
    """Transmitter and fiber/amplifier chain, up to the receiver input.

    Returns the per-polarization transmitted blocks and the dual-pol field
    after the last amplifier.  All randomness (bits per polarization, WDM
    decorrelation shifts, ASE) comes from independent child streams of
    cfg.seed, so results do not depend on evaluation order elsewhere.
    """
    c = build_qam(cfg.modulation_order)
    k = c.bits_per_symbol
    ss = np.random.SeedSequence(cfg.seed)
    seed_bits_x, seed_bits_y, seed_shift, seed_ase = ss.spawn(4)

    bits_x = generate_bits(int(seed_bits_x.generate_state(1)[0]), cfg.n_symbols * k)
    bits_y = generate_bits(int(seed_bits_y.generate_state(1)[0]), cfg.n_symbols * k)
    tx_x = map_bits(bits_x, c)
    tx_y = map_bits(bits_y, c)

    taps = rrc_taps(cfg.rolloff, cfg.rrc_span_symbols, cfg.sps)
    shaped = upsample_and_shape(
        tx_x, tx_y, taps, cfg.sps, cfg.baud, cfg.launch_power_dbm
    )
    signal = wdm_mux(
        shaped,
        cfg.n_wdm_channels,
        cfg.wdm_spacing_hz,
        cfg.sps,
        cfg.occupied_bandwidth_hz,
        np.random.default_rng(seed_shift),
    )

    nl_factor = MANAKOV_FACTOR if cfg.polarization_coupled else 1.0
    span_gain_db = cfg.fiber.alpha_db_per_km * cfg.fiber.span_km
    ase_rng = np.random.default_rng(seed_ase)
    for _ in range(cfg.fiber.n_spans):
        signal = ssfm_span(signal, cfg.fiber, "forward", nl_factor)
        signal = edfa(
            signal, span_gain_db, cfg.edfa_nf_db, cfg.fiber.carrier_freq_hz, ase_rng
        )
    return tx_x, tx_y, signal


def receive(
    cfg: LinkConfig,
    tx_x: SymbolBlock,
    tx_y: SymbolBlock,
    signal: SampledSignal,
    dbp_enabled: bool,
) -> tuple[SymbolBlock, SymbolBlock]:
    """Receiver DSP: channel extraction, CDC or DBP, matched filter, align.

    Deterministic given its inputs, so both receiver variants can be
    compared on the same propagated field.  Returns per-polarization
    (tx, rx) blocks with rx least-squares normalized towards the clean
    constellation.
    """
    taps = rrc_taps(cfg.rolloff, cfg.rrc_span_symbols, cfg.sps)
    nl_factor = MANAKOV_FACTOR if cfg.polarization_coupled else 1.0
    span_gain_db = cfg.fiber.alpha_db_per_km * cfg.fiber.span_km

    extracted = bandpass_extract(signal, 0.0, min(cfg.wdm_spacing_hz, cfg.sample_rate))
    if dbp_enabled:
        recovered = dbp_single_channel(
            extracted, cfg.fiber, cfg.launch_power_dbm, span_gain_db, nl_factor
        )
    else:
        recovered = cd_compensate(
            extracted, cfg.fiber, cfg.fiber.span_km * cfg.fiber.n_spans
        )
    rx_x, rx_y = matched_filter_downsample(recovered, taps, cfg.sps)

    blk_x = SymbolBlock(tx_x.tx_indices, normalize_block(rx_x, tx_x.rx))
    blk_y = SymbolBlock(tx_y.tx_indices, normalize_block(rx_y, tx_y.rx))
    return blk_x, blk_y


def simulate_link(cfg: LinkConfig) -> tuple[SymbolBlock, SymbolBlock]:
    """Run the full transmitter -> fiber -> receiver chain for one seed.

    Returns the aligned (tx, rx) symbol blocks of the center channel, one
    per polarization.  Equivalent to ``propagate`` followed by ``receive``
    with the configured equalizer choice.
    """
    tx_x, tx_y, signal = propagate(cfg)
    return receive(cfg, tx_x, tx_y, signal, cfg.dbp_enabled)
