"""Experiment orchestration: configuration, sweeps, verification, CSV output.

Configurations are YAML documents validated against a strict schema
(unknown keys rejected).  Three built-in presets trade runtime for
fidelity: ``check`` (seconds, smoke), ``desk`` (minutes, scaled link),
``paper`` (hours to days, full-scale link).  Every run is fully
determined by (config, seed): link rows share one seed so noise
realizations are common across sweep points, and verification points use
per-point child streams.
"""

from __future__ import annotations

import copy
import csv
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, fields

import jsonschema
import numpy as np
import yaml

from .channels import PcawgnParams, apply_pcawgn, snr_to_n0
from .constellation import SymbolBlock, build_qam
from .exact_mi import QuadratureSpec, exact_mi_monte_carlo
from .fiber import FiberParams, LinkConfig, propagate, receive, simulate_link
from .hist_mi import estimate_mi

__all__ = [
    "ConfigError",
    "SpacingPoint",
    "VerifySettings",
    "ExperimentConfig",
    "SweepRow",
    "SweepResult",
    "VerifyRow",
    "VerifyReport",
    "preset",
    "load_config",
    "merge_config",
    "config_from_dict",
    "spectral_efficiency",
    "required_overhead",
    "run_power_sweep",
    "run_power_sweep_both_receivers",
    "run_spacing_sweep",
    "verify_estimator",
    "write_results",
    "read_results",
    "write_verify_report",
]


class ConfigError(ValueError):
    """An experiment configuration failed validation."""


# --------------------------------------------------------------------------
# Configuration schema and presets
# --------------------------------------------------------------------------

_SPACING_SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "required": ["wdm_spacing_hz", "n_wdm_channels"],
    "properties": {
        "wdm_spacing_hz": {"type": "number", "exclusiveMinimum": 0},
        "n_wdm_channels": {"type": "integer", "minimum": 1},
    },
}

CONFIG_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "additionalProperties": False,
    "required": ["tier", "seed", "link", "fiber", "power_sweep", "spacing_sweep", "verify"],
    "properties": {
        "tier": {"enum": ["check", "desk", "paper"]},
        "seed": {"type": "integer", "minimum": 0},
        "nb_max": {"type": "integer", "minimum": 1},
        "dbp": {"type": "boolean"},
        "output": {"type": ["string", "null"]},
        "link": {
            "type": "object",
            "additionalProperties": False,
            "required": ["baud_hz", "rolloff", "sps", "n_symbols"],
            "properties": {
                "baud_hz": {"type": "number", "exclusiveMinimum": 0},
                "rolloff": {"type": "number", "exclusiveMinimum": 0, "exclusiveMaximum": 1},
                "sps": {"type": "integer", "minimum": 2},
                "rrc_span_symbols": {"type": "integer", "minimum": 2},
                "n_symbols": {"type": "integer", "minimum": 2},
                "edfa_nf_db": {"type": ["number", "null"]},
            },
        },
        "fiber": {
            "type": "object",
            "additionalProperties": False,
            "required": ["span_km", "n_spans", "step_km"],
            "properties": {
                "alpha_db_per_km": {"type": "number", "minimum": 0},
                "gamma_per_w_km": {"type": "number", "minimum": 0},
                "dispersion_ps_nm_km": {"type": "number"},
                "span_km": {"type": "number", "exclusiveMinimum": 0},
                "n_spans": {"type": "integer", "minimum": 1},
                "step_km": {"type": "number", "exclusiveMinimum": 0},
                "carrier_nm": {"type": "number", "exclusiveMinimum": 0},
            },
        },
        "power_sweep": {
            "type": "object",
            "additionalProperties": False,
            "required": ["modulation_orders", "powers_dbm", "wdm_spacing_hz", "n_wdm_channels"],
            "properties": {
                "modulation_orders": {
                    "type": "array",
                    "minItems": 1,
                    "items": {"type": "integer", "minimum": 2},
                },
                "powers_dbm": {
                    "type": "array",
                    "minItems": 1,
                    "items": {"type": "number"},
                },
                "wdm_spacing_hz": {"type": "number", "exclusiveMinimum": 0},
                "n_wdm_channels": {"type": "integer", "minimum": 1},
            },
        },
        "spacing_sweep": {
            "type": "object",
            "additionalProperties": False,
            "required": ["modulation_order", "powers_dbm", "spacings"],
            "properties": {
                "modulation_order": {"type": "integer", "minimum": 2},
                "powers_dbm": {
                    "type": "array",
                    "minItems": 1,
                    "items": {"type": "number"},
                },
                "spacings": {"type": "array", "minItems": 1, "items": _SPACING_SCHEMA},
            },
        },
        "verify": {
            "type": "object",
            "additionalProperties": False,
            "required": ["modulation_orders", "snrs_db", "sigma_phi2", "n_symbols"],
            "properties": {
                "modulation_orders": {
                    "type": "array",
                    "minItems": 1,
                    "items": {"type": "integer", "minimum": 2},
                },
                "snrs_db": {"type": "array", "minItems": 1, "items": {"type": "number"}},
                "sigma_phi2": {
                    "type": "array",
                    "minItems": 1,
                    "items": {"type": "number", "minimum": 0},
                },
                "n_symbols": {"type": "integer", "minimum": 2},
                "n_phi": {"type": "integer", "minimum": 64},
                "k_wrap": {"type": "integer", "minimum": 3},
                "n_mc": {"type": "integer", "minimum": 10000},
            },
        },
    },
}

_DESK_POWERS = [float(p) for p in range(-8, 5)]

PRESETS: dict[str, dict] = {
    # Smoke tier: a few seconds end to end, exercises every code path.
    "check": {
        "tier": "check",
        "seed": 11,
        "nb_max": 60,
        "dbp": False,
        "output": None,
        "link": {
            "baud_hz": 28e9,
            "rolloff": 0.05,
            "sps": 8,
            "rrc_span_symbols": 32,
            "n_symbols": 1024,
            "edfa_nf_db": 17.0,
        },
        "fiber": {
            "alpha_db_per_km": 0.2,
            "gamma_per_w_km": 8.0,
            "dispersion_ps_nm_km": 17.0,
            "span_km": 80.0,
            "n_spans": 2,
            "step_km": 0.5,
            "carrier_nm": 1550.0,
        },
        "power_sweep": {
            "modulation_orders": [4],
            "powers_dbm": [-4.0, 0.0],
            "wdm_spacing_hz": 50e9,
            "n_wdm_channels": 1,
        },
        "spacing_sweep": {
            "modulation_order": 4,
            "powers_dbm": [-4.0],
            "spacings": [
                {"wdm_spacing_hz": 50e9, "n_wdm_channels": 1},
                {"wdm_spacing_hz": 30e9, "n_wdm_channels": 3},
            ],
        },
        "verify": {
            "modulation_orders": [4],
            "snrs_db": [0.0, 10.0],
            "sigma_phi2": [0.0, 0.1],
            "n_symbols": 4096,
            "n_phi": 256,
            "k_wrap": 5,
            "n_mc": 20000,
        },
    },
    # Scaled link: shorter haul with noisier amplifiers and stronger Kerr
    # effect so the nonlinear power trade-off appears at desk runtimes.
    "desk": {
        "tier": "desk",
        "seed": 11,
        "nb_max": 60,
        "dbp": False,
        "output": None,
        "link": {
            "baud_hz": 28e9,
            "rolloff": 0.05,
            "sps": 8,
            "rrc_span_symbols": 64,
            "n_symbols": 4096,
            "edfa_nf_db": 17.0,
        },
        "fiber": {
            "alpha_db_per_km": 0.2,
            "gamma_per_w_km": 8.0,
            "dispersion_ps_nm_km": 17.0,
            "span_km": 80.0,
            "n_spans": 10,
            "step_km": 0.5,
            "carrier_nm": 1550.0,
        },
        "power_sweep": {
            "modulation_orders": [4, 16, 64],
            "powers_dbm": _DESK_POWERS,
            "wdm_spacing_hz": 30e9,
            "n_wdm_channels": 5,
        },
        "spacing_sweep": {
            "modulation_order": 16,
            "powers_dbm": [-8.0, 0.0],
            "spacings": [
                {"wdm_spacing_hz": 27.5e9, "n_wdm_channels": 5},
                {"wdm_spacing_hz": 30e9, "n_wdm_channels": 5},
                {"wdm_spacing_hz": 50e9, "n_wdm_channels": 3},
            ],
        },
        "verify": {
            "modulation_orders": [4, 16, 64],
            "snrs_db": [-5.0, 0.0, 5.0, 10.0, 15.0, 20.0, 25.0],
            "sigma_phi2": [0.0, 0.01, 0.1],
            "n_symbols": 16384,
            "n_phi": 256,
            "k_wrap": 5,
            "n_mc": 100000,
        },
    },
    # Full-scale 6000 km link; expect multi-hour runtimes per sweep.
    "paper": {
        "tier": "paper",
        "seed": 11,
        "nb_max": 60,
        "dbp": False,
        "output": None,
        "link": {
            "baud_hz": 28e9,
            "rolloff": 0.05,
            "sps": 32,
            "rrc_span_symbols": 64,
            "n_symbols": 65536,
            "edfa_nf_db": 4.0,
        },
        "fiber": {
            "alpha_db_per_km": 0.2,
            "gamma_per_w_km": 1.3,
            "dispersion_ps_nm_km": 17.0,
            "span_km": 100.0,
            "n_spans": 60,
            "step_km": 0.1,
            "carrier_nm": 1550.0,
        },
        "power_sweep": {
            "modulation_orders": [4, 16, 64],
            "powers_dbm": _DESK_POWERS,
            "wdm_spacing_hz": 50e9,
            "n_wdm_channels": 9,
        },
        "spacing_sweep": {
            "modulation_order": 16,
            "powers_dbm": _DESK_POWERS,
            "spacings": [
                {"wdm_spacing_hz": 27.5e9, "n_wdm_channels": 17},
                {"wdm_spacing_hz": 30e9, "n_wdm_channels": 15},
                {"wdm_spacing_hz": 35e9, "n_wdm_channels": 13},
                {"wdm_spacing_hz": 40e9, "n_wdm_channels": 11},
                {"wdm_spacing_hz": 45e9, "n_wdm_channels": 11},
                {"wdm_spacing_hz": 50e9, "n_wdm_channels": 9},
            ],
        },
        "verify": {
            "modulation_orders": [4, 16, 64],
            "snrs_db": [-5.0, 0.0, 5.0, 10.0, 15.0, 20.0, 25.0],
            "sigma_phi2": [0.0, 0.01, 0.1],
            "n_symbols": 16384,
            "n_phi": 512,
            "k_wrap": 5,
            "n_mc": 200000,
        },
    },
}

_LINK_DEFAULTS = {"rrc_span_symbols": 64, "edfa_nf_db": 4.0}
_FIBER_DEFAULTS = {
    "alpha_db_per_km": 0.2,
    "gamma_per_w_km": 1.3,
    "dispersion_ps_nm_km": 17.0,
    "carrier_nm": 1550.0,
}
_VERIFY_DEFAULTS = {"n_phi": 512, "k_wrap": 5, "n_mc": 200000}


@dataclass(frozen=True)
class SpacingPoint:
    wdm_spacing_hz: float
    n_wdm_channels: int


@dataclass(frozen=True)
class VerifySettings:
    modulation_orders: tuple[int, ...]
    snrs_db: tuple[float, ...]
    sigma_phi2: tuple[float, ...]
    n_symbols: int
    n_phi: int
    k_wrap: int
    n_mc: int


@dataclass(frozen=True)
class ExperimentConfig:
    """Validated, immutable view of one experiment document."""

    tier: str
    seed: int
    nb_max: int
    dbp: bool
    output: str | None
    baud_hz: float
    rolloff: float
    sps: int
    rrc_span_symbols: int
    n_symbols: int
    edfa_nf_db: float | None
    fiber: FiberParams
    power_modulation_orders: tuple[int, ...]
    power_powers_dbm: tuple[float, ...]
    power_spacing: SpacingPoint
    spacing_modulation_order: int
    spacing_powers_dbm: tuple[float, ...]
    spacings: tuple[SpacingPoint, ...]
    verify: VerifySettings

    @property
    def occupied_bandwidth_hz(self) -> float:
        return self.baud_hz * (1.0 + self.rolloff)

    def is_sub_nyquist(self, spacing_hz: float) -> bool:
        return spacing_hz < self.occupied_bandwidth_hz

    def link_config(
        self,
        modulation_order: int,
        launch_power_dbm: float,
        spacing: SpacingPoint,
        dbp: bool,
    ) -> LinkConfig:
        return LinkConfig(
            modulation_order=modulation_order,
            launch_power_dbm=launch_power_dbm,
            n_symbols=self.n_symbols,
            baud=self.baud_hz,
            rolloff=self.rolloff,
            sps=self.sps,
            wdm_spacing_hz=spacing.wdm_spacing_hz,
            n_wdm_channels=spacing.n_wdm_channels,
            edfa_nf_db=self.edfa_nf_db,
            fiber=self.fiber,
            dbp_enabled=dbp,
            rrc_span_symbols=self.rrc_span_symbols,
            seed=self.seed,
        )


def preset(tier: str) -> dict:
    """Deep copy of a built-in configuration document."""
    if tier not in PRESETS:
        raise ConfigError(f"unknown tier {tier!r}; expected one of {sorted(PRESETS)}")
    return copy.deepcopy(PRESETS[tier])


def load_config(path: str) -> dict:
    """Parse a YAML configuration document (no validation yet)."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            doc = yaml.safe_load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except yaml.YAMLError as exc:
        raise ConfigError(f"malformed YAML in {path}: {exc}") from exc
    if not isinstance(doc, dict):
        raise ConfigError(f"config {path} must be a mapping at the top level")
    return doc


def merge_config(base: dict, overlay: dict) -> dict:
    """Recursively overlay one document on another (lists replace wholesale)."""
    out = copy.deepcopy(base)
    for key, value in overlay.items():
        if isinstance(value, dict) and isinstance(out.get(key), dict):
            out[key] = merge_config(out[key], value)
        else:
            out[key] = copy.deepcopy(value)
    return out


def config_from_dict(doc: dict) -> ExperimentConfig:
    """Validate a configuration document and freeze it.

    Schema violations (including unknown keys) and physically infeasible
    WDM layouts raise ConfigError.
    """
    try:
        jsonschema.validate(doc, CONFIG_SCHEMA)
    except jsonschema.ValidationError as exc:
        path = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise ConfigError(f"config invalid at {path}: {exc.message}") from exc

    link = {**_LINK_DEFAULTS, **doc["link"]}
    fib = {**_FIBER_DEFAULTS, **doc["fiber"]}
    ver = {**_VERIFY_DEFAULTS, **doc["verify"]}
    try:
        fiber = FiberParams(
            alpha_db_per_km=fib["alpha_db_per_km"],
            gamma_per_w_km=fib["gamma_per_w_km"],
            dispersion_ps_nm_km=fib["dispersion_ps_nm_km"],
            span_km=fib["span_km"],
            n_spans=fib["n_spans"],
            step_km=fib["step_km"],
            carrier_nm=fib["carrier_nm"],
        )
    except ValueError as exc:
        raise ConfigError(f"fiber section invalid: {exc}") from exc

    ps = doc["power_sweep"]
    sw = doc["spacing_sweep"]
    cfg = ExperimentConfig(
        tier=doc["tier"],
        seed=doc["seed"],
        nb_max=doc.get("nb_max", 60),
        dbp=doc.get("dbp", False),
        output=doc.get("output"),
        baud_hz=float(link["baud_hz"]),
        rolloff=float(link["rolloff"]),
        sps=link["sps"],
        rrc_span_symbols=link["rrc_span_symbols"],
        n_symbols=link["n_symbols"],
        edfa_nf_db=link["edfa_nf_db"],
        fiber=fiber,
        power_modulation_orders=tuple(ps["modulation_orders"]),
        power_powers_dbm=tuple(float(p) for p in ps["powers_dbm"]),
        power_spacing=SpacingPoint(float(ps["wdm_spacing_hz"]), ps["n_wdm_channels"]),
        spacing_modulation_order=sw["modulation_order"],
        spacing_powers_dbm=tuple(float(p) for p in sw["powers_dbm"]),
        spacings=tuple(
            SpacingPoint(float(s["wdm_spacing_hz"]), s["n_wdm_channels"])
            for s in sw["spacings"]
        ),
        verify=VerifySettings(
            modulation_orders=tuple(ver["modulation_orders"]),
            snrs_db=tuple(float(v) for v in ver["snrs_db"]),
            sigma_phi2=tuple(float(v) for v in ver["sigma_phi2"]),
            n_symbols=ver["n_symbols"],
            n_phi=ver["n_phi"],
            k_wrap=ver["k_wrap"],
            n_mc=ver["n_mc"],
        ),
    )
    _check_feasible(cfg)
    return cfg


def _check_feasible(cfg: ExperimentConfig) -> None:
    fs = cfg.baud_hz * cfg.sps
    for where, sp in [("power_sweep", cfg.power_spacing)] + [
        ("spacing_sweep", s) for s in cfg.spacings
    ]:
        if sp.n_wdm_channels % 2 == 0:
            raise ConfigError(f"{where}: n_wdm_channels must be odd, got {sp.n_wdm_channels}")
        band = sp.n_wdm_channels * sp.wdm_spacing_hz + cfg.occupied_bandwidth_hz
        if band > fs:
            raise ConfigError(
                f"{where}: {sp.n_wdm_channels} channels at {sp.wdm_spacing_hz:.4g} Hz "
                f"need {band:.4g} Hz but the sample rate is {fs:.4g} Hz; "
                f"reduce channels/spacing or raise sps"
            )
    for m in set(cfg.power_modulation_orders) | {cfg.spacing_modulation_order} | set(
        cfg.verify.modulation_orders
    ):
        try:
            build_qam(m)
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc


# --------------------------------------------------------------------------
# Figures of merit
# --------------------------------------------------------------------------


def spectral_efficiency(mi_bits_per_symbol: float, baud_hz: float, spacing_hz: float) -> float:
    """Net dual-polarization spectral efficiency, 2 * mi * baud / spacing.

    ``mi_bits_per_symbol`` is per polarization; the ideal-FEC reading makes
    the MI itself the net rate per symbol.
    """
    if spacing_hz <= 0:
        raise ValueError("spacing must be positive")
    return 2.0 * mi_bits_per_symbol * baud_hz / spacing_hz


def required_overhead(mi_bits_per_symbol: float, order: int) -> float:
    """Minimum FEC overhead (log2 M / MI) - 1 to reach the MI rate."""
    k = np.log2(order)
    if mi_bits_per_symbol <= 0 or mi_bits_per_symbol > k + 1e-12:
        raise ValueError(
            f"mi must lie in (0, log2 M]; got {mi_bits_per_symbol} for M={order}"
        )
    return k / mi_bits_per_symbol - 1.0


# --------------------------------------------------------------------------
# Sweep rows and CSV serialization
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class SweepRow:
    modulation: int
    launch_power_dbm: float
    wdm_spacing_hz: float
    dbp: bool
    mi_bits_per_symbol: float | None
    mi_x: float | None
    mi_y: float | None
    se_bits_s_hz: float | None
    nb_i_x: int | None
    nb_q_x: int | None
    nb_i_y: int | None
    nb_q_y: int | None
    n_symbols: int
    seed: int
    sub_nyquist: bool
    error: str = ""


SWEEP_FIELDS = [f.name for f in fields(SweepRow)]


@dataclass(frozen=True)
class SweepResult:
    rows: tuple[SweepRow, ...]


@dataclass(frozen=True)
class VerifyRow:
    modulation: int
    snr_db: float
    sigma_phi2: float
    n_symbols: int
    mi_estimate: float
    mi_exact: float
    exact_std_error: float
    abs_dev: float
    nb_i: int
    nb_q: int


VERIFY_FIELDS = [f.name for f in fields(VerifyRow)]


@dataclass(frozen=True)
class VerifyReport:
    rows: tuple[VerifyRow, ...]

    @property
    def max_abs_dev(self) -> float:
        return max(r.abs_dev for r in self.rows)

    @property
    def mean_abs_dev(self) -> float:
        return float(np.mean([r.abs_dev for r in self.rows]))

    def deviations_by_order(self) -> dict[int, tuple[float, float]]:
        """order -> (max_abs_dev, mean_abs_dev) over that order's rows."""
        out: dict[int, tuple[float, float]] = {}
        for m in sorted({r.modulation for r in self.rows}):
            devs = [r.abs_dev for r in self.rows if r.modulation == m]
            out[m] = (max(devs), float(np.mean(devs)))
        return out


def _fmt(value) -> str:
    """Deterministic text form: shortest round-trip repr for floats."""
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _parse(text: str, target: type):
    if text == "":
        return None
    if target is bool:
        return text == "true"
    return target(text)


def write_results(result: SweepResult, path: str) -> None:
    """Write sweep rows as CSV with the fixed header; byte-deterministic."""
    _write_csv(path, SWEEP_FIELDS, result.rows)


def write_verify_report(report: VerifyReport, path: str) -> None:
    """Write verification rows as CSV with the fixed header."""
    _write_csv(path, VERIFY_FIELDS, report.rows)


def _write_csv(path: str, fieldnames: list[str], rows) -> None:
    try:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(fieldnames)
            for row in rows:
                writer.writerow([_fmt(getattr(row, name)) for name in fieldnames])
    except OSError as exc:
        raise OSError(f"cannot write results to {path}: {exc}") from exc


_SWEEP_TYPES = {
    "modulation": int,
    "launch_power_dbm": float,
    "wdm_spacing_hz": float,
    "dbp": bool,
    "mi_bits_per_symbol": float,
    "mi_x": float,
    "mi_y": float,
    "se_bits_s_hz": float,
    "nb_i_x": int,
    "nb_q_x": int,
    "nb_i_y": int,
    "nb_q_y": int,
    "n_symbols": int,
    "seed": int,
    "sub_nyquist": bool,
    "error": str,
}


def read_results(path: str) -> SweepResult:
    """Parse a sweep CSV back into rows (inverse of write_results)."""
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if header != SWEEP_FIELDS:
            raise ValueError(f"unexpected header in {path}: {header}")
        rows = []
        for rec in reader:
            kwargs = {
                name: _parse(text, _SWEEP_TYPES[name])
                for name, text in zip(SWEEP_FIELDS, rec)
            }
            kwargs["error"] = kwargs["error"] or ""
            rows.append(SweepRow(**kwargs))
    return SweepResult(rows=tuple(rows))


# --------------------------------------------------------------------------
# Sweep execution
# --------------------------------------------------------------------------


def _failed_row(
    link_cfg: LinkConfig, sub_nyquist: bool, exc: Exception, dbp: bool
) -> SweepRow:
    return SweepRow(
        modulation=link_cfg.modulation_order,
        launch_power_dbm=link_cfg.launch_power_dbm,
        wdm_spacing_hz=link_cfg.wdm_spacing_hz,
        dbp=dbp,
        mi_bits_per_symbol=None,
        mi_x=None,
        mi_y=None,
        se_bits_s_hz=None,
        nb_i_x=None,
        nb_q_x=None,
        nb_i_y=None,
        nb_q_y=None,
        n_symbols=link_cfg.n_symbols,
        seed=link_cfg.seed,
        sub_nyquist=sub_nyquist,
        error=f"{type(exc).__name__}: {exc}",
    )


def _row_from_blocks(
    link_cfg: LinkConfig,
    blocks: tuple[SymbolBlock, SymbolBlock],
    nb_max: int,
    sub_nyquist: bool,
    dbp: bool,
) -> SweepRow:
    bx, by = blocks
    est_x = estimate_mi(bx, link_cfg.modulation_order, nb_max=nb_max)
    est_y = estimate_mi(by, link_cfg.modulation_order, nb_max=nb_max)
    mi = 0.5 * (est_x.bits_per_symbol + est_y.bits_per_symbol)
    return SweepRow(
        modulation=link_cfg.modulation_order,
        launch_power_dbm=link_cfg.launch_power_dbm,
        wdm_spacing_hz=link_cfg.wdm_spacing_hz,
        dbp=dbp,
        mi_bits_per_symbol=mi,
        mi_x=est_x.bits_per_symbol,
        mi_y=est_y.bits_per_symbol,
        se_bits_s_hz=spectral_efficiency(mi, link_cfg.baud, link_cfg.wdm_spacing_hz),
        nb_i_x=est_x.grid.nb_i,
        nb_q_x=est_x.grid.nb_q,
        nb_i_y=est_y.grid.nb_i,
        nb_q_y=est_y.grid.nb_q,
        n_symbols=link_cfg.n_symbols,
        seed=link_cfg.seed,
        sub_nyquist=sub_nyquist,
    )


def _run_link_point(args: tuple[LinkConfig, int, bool]) -> SweepRow:
    """Worker: one propagation + receiver + estimator -> one row."""
    link_cfg, nb_max, sub_nyquist = args
    try:
        blocks = simulate_link(link_cfg)
        return _row_from_blocks(
            link_cfg, blocks, nb_max, sub_nyquist, link_cfg.dbp_enabled
        )
    except Exception as exc:  # recorded, not raised: one bad row must not kill a sweep
        return _failed_row(link_cfg, sub_nyquist, exc, link_cfg.dbp_enabled)


def _map_points(worker, points: list, workers: int) -> list:
    if workers <= 1 or len(points) <= 1:
        return [worker(p) for p in points]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(worker, points))


def run_power_sweep(cfg: ExperimentConfig, workers: int = 1) -> SweepResult:
    """MI versus launch power for every configured modulation order.

    One link simulation and two per-polarization estimates per (order,
    power) point; the DBP flag of the configuration selects the receiver.
    Rows are ordered by (order, power).
    """
    sub = cfg.is_sub_nyquist(cfg.power_spacing.wdm_spacing_hz)
    points = [
        (cfg.link_config(m, p, cfg.power_spacing, cfg.dbp), cfg.nb_max, sub)
        for m in cfg.power_modulation_orders
        for p in cfg.power_powers_dbm
    ]
    rows = _map_points(_run_link_point, points, workers)
    rows.sort(key=lambda r: (r.modulation, r.launch_power_dbm))
    return SweepResult(rows=tuple(rows))


def run_spacing_sweep(cfg: ExperimentConfig, workers: int = 1) -> SweepResult:
    """MI versus launch power for every configured WDM spacing.

    Spacings below baud*(1+rolloff) are flagged sub-Nyquist in the output.
    Rows are ordered by (spacing, power).
    """
    points = [
        (
            cfg.link_config(cfg.spacing_modulation_order, p, sp, cfg.dbp),
            cfg.nb_max,
            cfg.is_sub_nyquist(sp.wdm_spacing_hz),
        )
        for sp in cfg.spacings
        for p in cfg.spacing_powers_dbm
    ]
    rows = _map_points(_run_link_point, points, workers)
    rows.sort(key=lambda r: (r.wdm_spacing_hz, r.launch_power_dbm))
    return SweepResult(rows=tuple(rows))


def run_power_sweep_both_receivers(
    cfg: ExperimentConfig, workers: int = 1
) -> tuple[SweepResult, SweepResult]:
    """Power sweep evaluated with both receivers on shared propagations.

    Each (order, power) point is propagated once and demodulated twice
    (dispersion compensation only, then back-propagation), so the two
    result sets differ only in receiver processing — noise realizations
    are identical.  Row values match independent run_power_sweep calls
    with dbp off/on bit for bit.
    """
    sub = cfg.is_sub_nyquist(cfg.power_spacing.wdm_spacing_hz)
    points = [
        (cfg.link_config(m, p, cfg.power_spacing, False), cfg.nb_max, sub)
        for m in cfg.power_modulation_orders
        for p in cfg.power_powers_dbm
    ]
    pairs = _map_points(_run_link_point_both, points, workers)

    def key(row: SweepRow) -> tuple[int, float]:
        return (row.modulation, row.launch_power_dbm)

    cdc = sorted((a for a, _ in pairs), key=key)
    dbp = sorted((b for _, b in pairs), key=key)
    return SweepResult(rows=tuple(cdc)), SweepResult(rows=tuple(dbp))


def _run_link_point_both(
    args: tuple[LinkConfig, int, bool]
) -> tuple[SweepRow, SweepRow]:
    link_cfg, nb_max, sub_nyquist = args
    try:
        tx_x, tx_y, signal = propagate(link_cfg)
        row_cdc = _row_from_blocks(
            link_cfg, receive(link_cfg, tx_x, tx_y, signal, False),
            nb_max, sub_nyquist, False,
        )
        row_dbp = _row_from_blocks(
            link_cfg, receive(link_cfg, tx_x, tx_y, signal, True),
            nb_max, sub_nyquist, True,
        )
        return row_cdc, row_dbp
    except Exception as exc:
        return (
            _failed_row(link_cfg, sub_nyquist, exc, False),
            _failed_row(link_cfg, sub_nyquist, exc, True),
        )


# --------------------------------------------------------------------------
# Estimator verification against the reference channel
# --------------------------------------------------------------------------


def _point_entropy(seed: int, order: int, snr_db: float, sigma2: float) -> list[int]:
    """Non-negative integer entropy identifying one verification point.

    Derived from the point's own coordinates (not its position in the
    grid), so adding or removing grid points leaves every other point's
    random stream untouched.
    """
    return [
        seed,
        order,
        int(round(snr_db * 1000.0)) + 2**20,  # offset keeps negatives valid
        int(round(sigma2 * 1e9)),
    ]


def _verify_point(
    args: tuple[int, float, float, VerifySettings, int, int]
) -> VerifyRow:
    order, snr_db, sigma2, ver, nb_max, seed = args
    c = build_qam(order)
    params = PcawgnParams(n0=snr_to_n0(snr_db), sigma_phi2=sigma2)
    entropy = _point_entropy(seed, order, snr_db, sigma2)
    data_ss, mc_ss = np.random.SeedSequence(entropy).spawn(2)

    rng = np.random.default_rng(data_ss)
    tx = rng.integers(0, order, size=ver.n_symbols)
    clean = SymbolBlock(tx, c.points[tx])
    block = apply_pcawgn(clean, c, params, rng)
    est = estimate_mi(block, order, nb_max=nb_max)

    q = QuadratureSpec(n_phi=ver.n_phi, k_wrap=ver.k_wrap, n_mc=ver.n_mc)
    exact = exact_mi_monte_carlo(c, params, np.random.default_rng(mc_ss), q)
    return VerifyRow(
        modulation=order,
        snr_db=snr_db,
        sigma_phi2=sigma2,
        n_symbols=ver.n_symbols,
        mi_estimate=est.bits_per_symbol,
        mi_exact=exact.bits_per_symbol,
        exact_std_error=exact.std_error,
        abs_dev=abs(est.bits_per_symbol - exact.bits_per_symbol),
        nb_i=est.grid.nb_i,
        nb_q=est.grid.nb_q,
    )


def verify_estimator(cfg: ExperimentConfig, workers: int = 1) -> VerifyReport:
    """Compare the blind estimate against the reference-channel MI.

    Runs the configured (order x SNR x phase-noise) grid; each point draws
    its own deterministic child stream of cfg.seed, so the grid shape can
    change without perturbing other points.  Rows are ordered by
    (order, snr, sigma2).
    """
    ver = cfg.verify
    grid = [
        (m, snr, s2)
        for m in ver.modulation_orders
        for snr in ver.snrs_db
        for s2 in ver.sigma_phi2
    ]
    points = [(m, snr, s2, ver, cfg.nb_max, cfg.seed) for m, snr, s2 in sorted(grid)]
    rows = _map_points(_verify_point, points, workers)
    rows.sort(key=lambda r: (r.modulation, r.snr_db, r.sigma_phi2))
    return VerifyReport(rows=tuple(rows))
