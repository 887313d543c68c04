"""Command-line behavior: exit codes, flag plumbing, and output files."""

from __future__ import annotations

import numpy as np

from blindmi.cli import main
from blindmi.experiments import read_results

TINY_VERIFY = """
verify:
  modulation_orders: [4]
  snrs_db: [10.0]
  sigma_phi2: [0.0]
  n_symbols: 2048
  n_phi: 64
  k_wrap: 3
  n_mc: 10000
"""


class TestExitCodes:
    def test_success_is_zero(self, tmp_path, capsys):
        out = tmp_path / "sweep.csv"
        assert main(["power-sweep", "--tier", "check", "--out", str(out)]) == 0
        stdout = capsys.readouterr().out
        assert f"wrote 2 rows to {out}" in stdout
        assert len(read_results(str(out)).rows) == 2

    def test_validation_error_is_one(self, tmp_path, capsys):
        overlay = tmp_path / "bad.yaml"
        overlay.write_text("link:\n  bogus: 1\n")
        code = main(
            ["power-sweep", "--tier", "check", "--config", str(overlay)]
        )
        assert code == 1
        assert "configuration error" in capsys.readouterr().err

    def test_unreadable_config_is_one(self, tmp_path, capsys):
        code = main(
            ["power-sweep", "--tier", "check", "--config", str(tmp_path / "nope.yaml")]
        )
        assert code == 1
        assert "cannot read config" in capsys.readouterr().err

    def test_runtime_failure_is_two(self, tmp_path, capsys):
        # 128 symbols validate, but the 3-channel spacing point cannot
        # decorrelate its neighbors at runtime; the sweep completes with
        # the failure recorded in-row and the CLI reports it.
        overlay = tmp_path / "short.yaml"
        overlay.write_text("link:\n  n_symbols: 128\n")
        out = tmp_path / "spacing.csv"
        code = main(
            [
                "spacing-sweep",
                "--tier",
                "check",
                "--config",
                str(overlay),
                "--out",
                str(out),
            ]
        )
        assert code == 2
        assert "FAILED" in capsys.readouterr().err
        rows = read_results(str(out)).rows
        assert any(r.error for r in rows) and any(not r.error for r in rows)


class TestFlagPlumbing:
    def test_dbp_flag_reaches_rows(self, tmp_path):
        out = tmp_path / "dbp.csv"
        assert main(
            ["power-sweep", "--tier", "check", "--out", str(out), "--dbp", "on"]
        ) == 0
        assert all(r.dbp for r in read_results(str(out)).rows)

    def test_seed_override_changes_results(self, tmp_path):
        paths = []
        for seed in ("1", "1", "2"):
            out = tmp_path / f"s{len(paths)}.csv"
            assert main(
                [
                    "power-sweep",
                    "--tier",
                    "check",
                    "--seed",
                    seed,
                    "--out",
                    str(out),
                ]
            ) == 0
            paths.append(out)
        assert paths[0].read_bytes() == paths[1].read_bytes()
        assert paths[0].read_bytes() != paths[2].read_bytes()

    def test_workers_flag_matches_serial(self, tmp_path):
        serial = tmp_path / "serial.csv"
        pooled = tmp_path / "pooled.csv"
        assert main(["power-sweep", "--tier", "check", "--out", str(serial)]) == 0
        assert main(
            ["power-sweep", "--tier", "check", "--out", str(pooled), "--workers", "2"]
        ) == 0
        assert serial.read_bytes() == pooled.read_bytes()


class TestCommands:
    def test_single_run_prints_summary(self, tmp_path, capsys):
        out = tmp_path / "single.csv"
        assert main(["single-run", "--tier", "check", "--out", str(out)]) == 0
        stdout = capsys.readouterr().out
        assert "bits/symbol" in stdout
        rows = read_results(str(out)).rows
        assert len(rows) == 1
        assert rows[0].error == ""

    def test_verify_estimator_reports_deviations(self, tmp_path, capsys):
        overlay = tmp_path / "tiny.yaml"
        overlay.write_text(TINY_VERIFY)
        out = tmp_path / "verify.csv"
        code = main(
            [
                "verify-estimator",
                "--tier",
                "check",
                "--config",
                str(overlay),
                "--out",
                str(out),
            ]
        )
        assert code == 0
        stdout = capsys.readouterr().out
        assert "max |dev|" in stdout
        text = out.read_text()
        header, row = text.splitlines()
        assert header.startswith("modulation,snr_db,sigma_phi2,")
        values = dict(zip(header.split(","), row.split(",")))
        assert values["modulation"] == "4"
        assert abs(float(values["mi_estimate"]) - float(values["mi_exact"])) == float(
            values["abs_dev"]
        )
        assert np.isfinite(float(values["mi_exact"]))
