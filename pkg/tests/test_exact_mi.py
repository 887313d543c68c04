"""Exact MI references: transition density, quadrature, and Monte Carlo."""

import numpy as np
import pytest

from blindmi.channels import PcawgnParams, snr_to_n0
from blindmi.constellation import build_qam
from blindmi.exact_mi import (
    DegenerateDensityError,
    QuadratureSpec,
    awgn_capacity,
    exact_mi_awgn_quadrature,
    exact_mi_monte_carlo,
    pcawgn_transition_pdf,
)

# Adaptive-quadrature values computed with mpmath (40 digits) for
# p(y=0.3+0.4j | x=1) with N0=0.1 and the phase averaged over a wrapped
# Gaussian of the given variance.
PDF_ORACLE = {
    0.05: 0.013386424474124031766,
    0.5: 0.05286946513849845708,
}


class TestQuadratureSpec:
    def test_defaults_valid(self):
        q = QuadratureSpec()
        assert q.n_phi >= 64 and q.k_wrap >= 3 and q.n_mc >= 10_000

    @pytest.mark.parametrize("kwargs", [
        {"n_phi": 32}, {"k_wrap": 1}, {"n_mc": 100},
    ])
    def test_invalid_rejected(self, kwargs):
        with pytest.raises(ValueError):
            QuadratureSpec(**kwargs)


class TestTransitionPdf:
    @pytest.mark.parametrize("s2,expected", sorted(PDF_ORACLE.items()))
    def test_matches_adaptive_quadrature_oracle(self, s2, expected):
        val = pcawgn_transition_pdf(
            0.3 + 0.4j, 1.0 + 0.0j, PcawgnParams(n0=0.1, sigma_phi2=s2)
        )
        assert val == pytest.approx(expected, rel=1e-12)

    def test_zero_phase_noise_is_gaussian(self):
        n0 = 0.3
        y, x = 0.2 - 0.1j, -0.5 + 0.5j
        expected = np.exp(-abs(y - x) ** 2 / n0) / (np.pi * n0)
        assert pcawgn_transition_pdf(y, x, PcawgnParams(n0=n0)) == pytest.approx(expected)

    def test_continuous_as_phase_noise_vanishes(self):
        p0 = pcawgn_transition_pdf(0.9 + 0.1j, 1.0, PcawgnParams(n0=0.2))
        p1 = pcawgn_transition_pdf(
            0.9 + 0.1j, 1.0, PcawgnParams(n0=0.2, sigma_phi2=1e-8)
        )
        assert p1 == pytest.approx(p0, rel=1e-4)

    @pytest.mark.parametrize("s2", [0.0, 0.02, 0.3])
    def test_normalizes_to_one(self, s2):
        # integrate p(y|x) over a wide Cartesian grid
        n0 = 0.1
        g = np.linspace(-4, 4, 401)
        step = g[1] - g[0]
        yy = (g[:, None] + 1j * g[None, :]).ravel()
        pdf = pcawgn_transition_pdf(yy, 0.7 + 0.7j, PcawgnParams(n0=n0, sigma_phi2=s2))
        assert float(np.sum(pdf)) * step**2 == pytest.approx(1.0, abs=1e-6)

    def test_vector_input_matches_scalars(self):
        params = PcawgnParams(n0=0.2, sigma_phi2=0.1)
        ys = np.array([0.1 + 0.2j, -1.0 - 1.0j, 0.5j])
        vec = pcawgn_transition_pdf(ys, 1.0, params)
        for y, v in zip(ys, vec):
            assert pcawgn_transition_pdf(complex(y), 1.0, params) == pytest.approx(v)

    def test_degenerate_noise_rejected(self):
        with pytest.raises(DegenerateDensityError):
            pcawgn_transition_pdf(0.0, 1.0, PcawgnParams(n0=0.0))


class TestAwgnCapacity:
    def test_zero_db_is_exactly_one(self):
        assert awgn_capacity(0.0) == 1.0

    def test_known_values(self):
        assert awgn_capacity(10.0) == pytest.approx(np.log2(11.0))
        # log2(1 + 1e-10) = 1e-10 / ln 2 ~ 1.44e-10
        assert awgn_capacity(-100.0) == pytest.approx(1e-10 / np.log(2.0), rel=1e-6)

    def test_monotone(self):
        caps = [awgn_capacity(s) for s in (-10, -5, 0, 5, 10, 20)]
        assert all(a < b for a, b in zip(caps, caps[1:]))


class TestExactMi:
    @pytest.mark.parametrize("order", [4, 16, 64])
    def test_quadrature_saturates_at_high_snr(self, order):
        mi = exact_mi_awgn_quadrature(build_qam(order), 40.0)
        assert mi.bits_per_symbol == pytest.approx(np.log2(order), abs=0.01)

    def test_quadrature_tracks_capacity_at_low_snr(self):
        # Far below saturation, QAM MI approaches the Gaussian capacity.
        mi = exact_mi_awgn_quadrature(build_qam(64), -5.0)
        assert mi.bits_per_symbol == pytest.approx(awgn_capacity(-5.0), abs=0.02)

    def test_monte_carlo_agrees_with_quadrature_awgn(self):
        # Dual-route check: two independent evaluations of the same MI.
        c = build_qam(16)
        params = PcawgnParams(n0=snr_to_n0(10.0))
        q = QuadratureSpec(n_mc=200_000)
        mc = exact_mi_monte_carlo(c, params, np.random.default_rng(17), q)
        gh = exact_mi_awgn_quadrature(c, 10.0)
        assert mc.std_error < 0.01
        assert mc.bits_per_symbol == pytest.approx(
            gh.bits_per_symbol, abs=4 * mc.std_error
        )

    def test_monte_carlo_phase_noise_reduces_mi(self):
        c = build_qam(16)
        rng = np.random.default_rng(3)
        q = QuadratureSpec(n_phi=256, n_mc=50_000)
        clean = exact_mi_monte_carlo(c, PcawgnParams(n0=snr_to_n0(15.0)), rng, q)
        noisy = exact_mi_monte_carlo(
            c, PcawgnParams(n0=snr_to_n0(15.0), sigma_phi2=0.1), rng, q
        )
        assert noisy.bits_per_symbol < clean.bits_per_symbol - 0.2

    def test_monte_carlo_sigma0_equals_tiny_sigma(self):
        # The mixture path at negligible phase noise must agree with the
        # closed-form Gaussian path.
        c = build_qam(4)
        q = QuadratureSpec(n_phi=256, n_mc=50_000)
        a = exact_mi_monte_carlo(
            c, PcawgnParams(n0=snr_to_n0(8.0)), np.random.default_rng(9), q
        )
        b = exact_mi_monte_carlo(
            c,
            PcawgnParams(n0=snr_to_n0(8.0), sigma_phi2=1e-10),
            np.random.default_rng(9),
            q,
        )
        assert b.bits_per_symbol == pytest.approx(a.bits_per_symbol, abs=0.02)

    def test_monte_carlo_reports_method_and_error(self):
        c = build_qam(4)
        mi = exact_mi_monte_carlo(
            c, PcawgnParams(n0=1.0), np.random.default_rng(0), QuadratureSpec(n_mc=20_000)
        )
        assert mi.method == "monte_carlo"
        assert 0.0 < mi.std_error < 0.05
        assert 0.0 < mi.bits_per_symbol < 2.0

    def test_monte_carlo_rejects_degenerate_noise(self):
        with pytest.raises(DegenerateDensityError):
            exact_mi_monte_carlo(
                build_qam(4), PcawgnParams(n0=0.0), np.random.default_rng(0)
            )
