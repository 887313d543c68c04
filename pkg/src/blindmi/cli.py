"""Command-line interface for estimator verification and link sweeps.

Exit codes: 0 on success, 1 for configuration/validation problems, 2 for
runtime failures.
"""

from __future__ import annotations

import argparse
import sys

from .experiments import (
    ConfigError,
    ExperimentConfig,
    SweepResult,
    _run_link_point,
    config_from_dict,
    load_config,
    merge_config,
    preset,
    run_power_sweep,
    run_spacing_sweep,
    verify_estimator,
    write_results,
    write_verify_report,
)

__all__ = ["main", "build_parser"]

_DEFAULT_OUT = {
    "verify-estimator": "verify_estimator.csv",
    "power-sweep": "power_sweep.csv",
    "spacing-sweep": "spacing_sweep.csv",
    "single-run": "single_run.csv",
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="blindmi",
        description=(
            "Blind mutual-information estimation over simulated coherent "
            "WDM fiber links"
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True)
    specs = {
        "verify-estimator": "compare the blind estimator against exact "
        "reference-channel MI over an (order x SNR x phase-noise) grid",
        "power-sweep": "MI versus launch power for each modulation order",
        "spacing-sweep": "MI versus launch power for each WDM spacing",
        "single-run": "one link simulation (first configured order/power)",
    }
    for name, help_text in specs.items():
        p = sub.add_parser(name, help=help_text, description=help_text)
        p.add_argument("--config", metavar="PATH", help="YAML overlay on the tier preset")
        p.add_argument(
            "--tier",
            choices=["check", "desk", "paper"],
            default="desk",
            help="base preset: check (seconds), desk (minutes), paper (hours+)",
        )
        p.add_argument("--seed", type=int, help="override the experiment seed")
        p.add_argument("--out", metavar="PATH", help="output CSV path")
        p.add_argument(
            "--dbp",
            choices=["on", "off"],
            help="override digital back-propagation in the receiver",
        )
        p.add_argument(
            "--workers",
            type=int,
            default=1,
            help="worker processes for sweep points (default 1)",
        )
    return parser


def _build_config(args: argparse.Namespace) -> ExperimentConfig:
    doc = preset(args.tier)
    if args.config:
        doc = merge_config(doc, load_config(args.config))
    if args.seed is not None:
        doc["seed"] = args.seed
    if args.dbp is not None:
        doc["dbp"] = args.dbp == "on"
    if args.out is not None:
        doc["output"] = args.out
    return config_from_dict(doc)


def _out_path(cfg: ExperimentConfig, command: str) -> str:
    return cfg.output or _DEFAULT_OUT[command]


def _report_sweep(result: SweepResult, path: str) -> None:
    failed = [r for r in result.rows if r.error]
    print(f"wrote {len(result.rows)} rows to {path}")
    for row in failed:
        print(
            f"  FAILED M={row.modulation} P={row.launch_power_dbm} dBm "
            f"spacing={row.wdm_spacing_hz:.4g} Hz: {row.error}",
            file=sys.stderr,
        )


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = _build_config(args)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 1

    path = _out_path(cfg, args.command)
    try:
        if args.command == "verify-estimator":
            report = verify_estimator(cfg, workers=args.workers)
            write_verify_report(report, path)
            print(f"wrote {len(report.rows)} rows to {path}")
            for order, (dmax, dmean) in report.deviations_by_order().items():
                print(f"  M={order:3d}: max |dev| {dmax:.4f}  mean |dev| {dmean:.4f}")
            print(
                f"  overall: max |dev| {report.max_abs_dev:.4f}  "
                f"mean |dev| {report.mean_abs_dev:.4f}"
            )
            return 0

        if args.command == "power-sweep":
            result = run_power_sweep(cfg, workers=args.workers)
        elif args.command == "spacing-sweep":
            result = run_spacing_sweep(cfg, workers=args.workers)
        else:  # single-run
            link_cfg = cfg.link_config(
                cfg.power_modulation_orders[0],
                cfg.power_powers_dbm[0],
                cfg.power_spacing,
                cfg.dbp,
            )
            sub = cfg.is_sub_nyquist(cfg.power_spacing.wdm_spacing_hz)
            result = SweepResult(rows=(_run_link_point((link_cfg, cfg.nb_max, sub)),))
        write_results(result, path)
        _report_sweep(result, path)
        if args.command == "single-run" and not result.rows[0].error:
            row = result.rows[0]
            print(
                f"  M={row.modulation} P={row.launch_power_dbm} dBm: "
                f"MI {row.mi_bits_per_symbol:.4f} bits/symbol "
                f"(x {row.mi_x:.4f}, y {row.mi_y:.4f}), "
                f"SE {row.se_bits_s_hz:.4f} bits/s/Hz"
            )
        return 2 if any(r.error for r in result.rows) else 0
    except Exception as exc:  # pragma: no cover - defensive top-level handler
        print(f"runtime error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
