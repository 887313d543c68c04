"""Configuration validation, figures of merit, CSV round-trips, and sweeps."""

from __future__ import annotations

import numpy as np
import pytest

from blindmi.experiments import (
    ConfigError,
    SweepResult,
    SweepRow,
    _point_entropy,
    config_from_dict,
    merge_config,
    preset,
    read_results,
    required_overhead,
    run_power_sweep,
    run_power_sweep_both_receivers,
    run_spacing_sweep,
    spectral_efficiency,
    verify_estimator,
    write_results,
)


def tiny_verify_overlay(**kw):
    base = {
        "verify": {
            "modulation_orders": [4],
            "snrs_db": [10.0],
            "sigma_phi2": [0.0],
            "n_symbols": 2048,
            "n_phi": 64,
            "k_wrap": 3,
            "n_mc": 10000,
        }
    }
    return merge_config(base, kw)


class TestSchemaAndPresets:
    @pytest.mark.parametrize("tier", ["check", "desk", "paper"])
    def test_builtin_presets_validate(self, tier):
        cfg = config_from_dict(preset(tier))
        assert cfg.tier == tier
        assert cfg.seed == 11
        assert cfg.nb_max == 60

    def test_preset_returns_independent_copies(self):
        a = preset("check")
        a["link"]["sps"] = 999
        assert preset("check")["link"]["sps"] == 8
        with pytest.raises(ConfigError):
            preset("nope")

    def test_desk_preset_values(self):
        cfg = config_from_dict(preset("desk"))
        assert cfg.n_symbols == 4096
        assert cfg.sps == 8
        assert cfg.fiber.n_spans == 10
        assert cfg.fiber.span_km == 80.0
        assert cfg.fiber.step_km == 0.5
        assert cfg.power_spacing.n_wdm_channels == 5
        assert cfg.power_powers_dbm == tuple(float(p) for p in range(-8, 5))
        assert cfg.power_modulation_orders == (4, 16, 64)

    def test_unknown_keys_rejected_at_any_level(self):
        doc = merge_config(preset("check"), {"bogus": 1})
        with pytest.raises(ConfigError):
            config_from_dict(doc)
        doc = merge_config(preset("check"), {"link": {"bogus": 1}})
        with pytest.raises(ConfigError, match="link"):
            config_from_dict(doc)

    def test_type_and_bound_violations_rejected(self):
        with pytest.raises(ConfigError, match="sps"):
            config_from_dict(merge_config(preset("check"), {"link": {"sps": 1}}))
        with pytest.raises(ConfigError):
            config_from_dict(merge_config(preset("check"), {"seed": -1}))
        with pytest.raises(ConfigError):
            config_from_dict(
                merge_config(preset("check"), {"verify": {"n_phi": 32}})
            )
        with pytest.raises(ConfigError):
            config_from_dict(
                merge_config(preset("check"), {"verify": {"n_mc": 5000}})
            )
        doc = preset("check")
        del doc["link"]["baud_hz"]
        with pytest.raises(ConfigError):
            config_from_dict(doc)

    def test_infeasible_wdm_layouts_rejected(self):
        doc = merge_config(
            preset("check"), {"power_sweep": {"n_wdm_channels": 9}}
        )  # 9 x 50 GHz does not fit 224 GHz
        with pytest.raises(ConfigError, match="power_sweep"):
            config_from_dict(doc)
        doc = merge_config(preset("check"), {"power_sweep": {"n_wdm_channels": 2}})
        with pytest.raises(ConfigError, match="odd"):
            config_from_dict(doc)
        doc = merge_config(
            preset("check"), {"power_sweep": {"modulation_orders": [12]}}
        )
        with pytest.raises(ConfigError):
            config_from_dict(doc)

    def test_fiber_errors_surface_as_config_errors(self):
        doc = merge_config(preset("check"), {"fiber": {"step_km": 0.3}})
        with pytest.raises(ConfigError, match="fiber"):
            config_from_dict(doc)

    def test_sub_nyquist_classification(self):
        cfg = config_from_dict(preset("check"))
        assert cfg.occupied_bandwidth_hz == pytest.approx(29.4e9)
        assert cfg.is_sub_nyquist(29.3e9)
        assert not cfg.is_sub_nyquist(29.5e9)

    def test_link_config_carries_experiment_settings(self):
        cfg = config_from_dict(preset("check"))
        lc = cfg.link_config(16, -1.5, cfg.spacings[1], dbp=True)
        assert lc.modulation_order == 16
        assert lc.launch_power_dbm == -1.5
        assert lc.wdm_spacing_hz == 30e9
        assert lc.n_wdm_channels == 3
        assert lc.dbp_enabled
        assert lc.seed == cfg.seed
        assert lc.fiber == cfg.fiber


class TestMergeConfig:
    def test_nested_scalar_overlay(self):
        merged = merge_config(preset("check"), {"link": {"sps": 16}})
        assert merged["link"]["sps"] == 16
        assert merged["link"]["baud_hz"] == 28e9  # untouched sibling

    def test_lists_replace_wholesale(self):
        merged = merge_config(
            preset("check"), {"power_sweep": {"powers_dbm": [1.0]}}
        )
        assert merged["power_sweep"]["powers_dbm"] == [1.0]

    def test_base_not_mutated(self):
        base = preset("check")
        merge_config(base, {"link": {"sps": 16}})
        assert base["link"]["sps"] == 8


class TestFiguresOfMerit:
    def test_spectral_efficiency_examples(self):
        assert spectral_efficiency(2.0, 28e9, 56e9) == 2.0
        assert spectral_efficiency(3.05, 28e9, 30e9) == pytest.approx(5.6933, abs=1e-3)
        with pytest.raises(ValueError):
            spectral_efficiency(2.0, 28e9, 0.0)

    @pytest.mark.parametrize("order", [4, 16, 64])
    @pytest.mark.parametrize("rate", [0.25, 0.5, 0.8, 1.0])
    def test_overhead_identity(self, order, rate):
        mi = np.log2(order) * rate
        assert required_overhead(mi, order) == pytest.approx(
            1.0 / rate - 1.0, rel=1e-12
        )

    def test_overhead_example_and_domain(self):
        assert required_overhead(3.1, 16) == pytest.approx(4.0 / 3.1 - 1.0, rel=1e-12)
        with pytest.raises(ValueError):
            required_overhead(0.0, 16)
        with pytest.raises(ValueError):
            required_overhead(4.2, 16)
        with pytest.raises(ValueError):
            required_overhead(-0.5, 16)


class TestCsvRoundTrip:
    def _rows(self):
        good = SweepRow(
            modulation=16,
            launch_power_dbm=-1.0,
            wdm_spacing_hz=50e9,
            dbp=False,
            mi_bits_per_symbol=3.0517578125e-05,
            mi_x=0.1,
            mi_y=0.30000000000000004,
            se_bits_s_hz=1.12,
            nb_i_x=17,
            nb_q_x=33,
            nb_i_y=9,
            nb_q_y=9,
            n_symbols=4096,
            seed=2026,
            sub_nyquist=False,
        )
        failed = SweepRow(
            modulation=64,
            launch_power_dbm=2.0,
            wdm_spacing_hz=30e9,
            dbp=True,
            mi_bits_per_symbol=None,
            mi_x=None,
            mi_y=None,
            se_bits_s_hz=None,
            nb_i_x=None,
            nb_q_x=None,
            nb_i_y=None,
            nb_q_y=None,
            n_symbols=4096,
            seed=2026,
            sub_nyquist=True,
            error="ConfigurationError: 7 channels, at 50 GHz, do not fit",
        )
        return SweepResult(rows=(good, failed))

    def test_write_read_inverse_including_failures(self, tmp_path):
        path = tmp_path / "rows.csv"
        result = self._rows()
        write_results(result, str(path))
        assert read_results(str(path)) == result

    def test_byte_deterministic(self, tmp_path):
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        write_results(self._rows(), str(a))
        write_results(self._rows(), str(b))
        assert a.read_bytes() == b.read_bytes()

    def test_empty_result_is_header_only(self, tmp_path):
        path = tmp_path / "empty.csv"
        write_results(SweepResult(rows=()), str(path))
        text = path.read_text()
        assert text.count("\n") == 1
        assert text.startswith("modulation,launch_power_dbm,")
        assert read_results(str(path)) == SweepResult(rows=())

    def test_read_rejects_foreign_header(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("a,b,c\n1,2,3\n")
        with pytest.raises(ValueError, match="header"):
            read_results(str(path))

    def test_write_failure_names_the_path(self, tmp_path):
        target = tmp_path / "no" / "such" / "dir" / "out.csv"
        with pytest.raises(OSError, match="out.csv"):
            write_results(self._rows(), str(target))


class TestVerifyEstimator:
    def test_deterministic_and_consistent(self):
        cfg = config_from_dict(merge_config(preset("check"), tiny_verify_overlay()))
        a = verify_estimator(cfg)
        b = verify_estimator(cfg)
        assert a.rows == b.rows
        row = a.rows[0]
        assert row.abs_dev == abs(row.mi_estimate - row.mi_exact)
        assert row.n_symbols == 2048
        assert a.max_abs_dev == max(r.abs_dev for r in a.rows)
        assert 4 in a.deviations_by_order()

    def test_grid_membership_does_not_perturb_points(self):
        # The (4, 10 dB, 0) row must be identical whether or not other grid
        # points exist, because each point derives its streams from its own
        # coordinates.
        small = config_from_dict(merge_config(preset("check"), tiny_verify_overlay()))
        big = config_from_dict(
            merge_config(
                preset("check"),
                tiny_verify_overlay(verify={"snrs_db": [0.0, 10.0]}),
            )
        )
        row_small = verify_estimator(small).rows[0]
        rows_big = verify_estimator(big).rows
        assert len(rows_big) == 2
        match = [r for r in rows_big if r.snr_db == 10.0]
        assert match == [row_small]

    def test_point_entropy_is_coordinate_based(self):
        assert _point_entropy(2026, 16, -5.0, 0.01) == [
            2026,
            16,
            -5000 + 2**20,
            10000000,
        ]
        assert _point_entropy(1, 4, 0.0, 0.0) == [1, 4, 2**20, 0]


class TestSweeps:
    def test_power_sweep_rows_and_ordering(self):
        cfg = config_from_dict(preset("check"))
        result = run_power_sweep(cfg)
        assert len(result.rows) == len(cfg.power_modulation_orders) * len(
            cfg.power_powers_dbm
        )
        keys = [(r.modulation, r.launch_power_dbm) for r in result.rows]
        assert keys == sorted(keys)
        for row in result.rows:
            assert row.error == ""
            assert row.mi_bits_per_symbol == pytest.approx(
                0.5 * (row.mi_x + row.mi_y)
            )
            assert row.se_bits_s_hz == spectral_efficiency(
                row.mi_bits_per_symbol, cfg.baud_hz, row.wdm_spacing_hz
            )
            assert not row.sub_nyquist  # 50 GHz > 29.4 GHz

    def test_power_sweep_deterministic(self):
        cfg = config_from_dict(preset("check"))
        assert run_power_sweep(cfg).rows == run_power_sweep(cfg).rows

    def test_both_receivers_match_independent_runs(self):
        cfg_off = config_from_dict(preset("check"))
        cfg_on = config_from_dict(merge_config(preset("check"), {"dbp": True}))
        cdc, dbp = run_power_sweep_both_receivers(cfg_off)
        assert cdc.rows == run_power_sweep(cfg_off).rows
        assert dbp.rows == run_power_sweep(cfg_on).rows
        for a, b in zip(cdc.rows, dbp.rows):
            assert (a.modulation, a.launch_power_dbm) == (
                b.modulation,
                b.launch_power_dbm,
            )
            assert not a.dbp and b.dbp

    def test_worker_pool_matches_serial(self):
        cfg = config_from_dict(preset("check"))
        assert run_power_sweep(cfg, workers=2).rows == run_power_sweep(cfg).rows

    def test_spacing_sweep_ordering_and_sub_nyquist_flag(self):
        doc = merge_config(
            preset("check"),
            {
                "spacing_sweep": {
                    "spacings": [
                        {"wdm_spacing_hz": 50e9, "n_wdm_channels": 1},
                        {"wdm_spacing_hz": 27.5e9, "n_wdm_channels": 3},
                    ]
                }
            },
        )
        result = run_spacing_sweep(config_from_dict(doc))
        spacings = [r.wdm_spacing_hz for r in result.rows]
        assert spacings == sorted(spacings)
        flags = {r.wdm_spacing_hz: r.sub_nyquist for r in result.rows}
        assert flags[27.5e9] and not flags[50e9]

    def test_runtime_failures_recorded_not_raised(self):
        # 128 symbols pass validation but cannot absorb the WDM
        # decorrelation shifts, so multi-channel points fail at runtime;
        # the single-channel points still succeed.
        doc = merge_config(preset("check"), {"link": {"n_symbols": 128}})
        cfg = config_from_dict(doc)
        result = run_spacing_sweep(cfg)
        by_spacing = {r.wdm_spacing_hz: r for r in result.rows}
        bad = by_spacing[30e9]  # 3 channels
        good = by_spacing[50e9]  # 1 channel
        assert "ConfigurationError" in bad.error
        assert bad.mi_bits_per_symbol is None
        assert good.error == ""
        assert good.mi_bits_per_symbol is not None
        # row accounting: every configured point appears exactly once
        assert len(result.rows) == 2
