"""
Command-line front end.

    ionmeter estimate --config run.json [--output out.csv] [--format csv|json]
                      [--shots M] [--seed S] [--unsafe]
    ionmeter sweep    --config run.json ...
    ionmeter rabi     --config run.json ...
    ionmeter parity   --config run.json ...
    ionmeter validate

Exit codes: 0 ok, 2 configuration error, 3 zone violation, 4 numerical
failure (including a failed ``validate`` check).

CSV output: ``#``-prefixed metadata lines (package version, git revision,
command, seed, config SHA-256), one header row in the documented column
order, then data rows; floats are written as ``%.16e``.

Custom observables (``observable.name = "custom"``) are read from
``observable.matrix_file``: the first non-comment line holds the
dimension ``d``, followed by ``d*d`` complex entries in row-major order,
each as a whitespace-separated ``re im`` pair. Lines starting with ``#``
are ignored.
"""

from __future__ import annotations

import argparse
import copy
import csv
import hashlib
import io
import json
import os
import subprocess
import sys
from pathlib import Path
from typing import Any

import jsonschema
import numpy as np

from . import __version__
from .experiments import (
    PARITY_COLUMNS,
    RABI_COLUMNS,
    SWEEP_COLUMNS,
    ParityDemoConfig,
    ScanGrid,
    StateSpec,
    estimator_sweep,
    parity_demo,
    parse_complex,
    rabi_scan,
)
from .hilbert import HermitianOperator, ModeLayout, SpectralWindow, expectation
from .observables import observable_by_name
from .protocol import ProtocolConfig, ZoneViolation, calibrate, estimate_mean
from .validation import run_validation

__all__ = ["main", "RUN_CONFIG_SCHEMA", "RESULT_SCHEMA", "load_matrix_file", "ConfigError"]

EXIT_OK, EXIT_CONFIG, EXIT_ZONE, EXIT_NUMERICAL = 0, 2, 3, 4

ESTIMATE_COLUMNS = (
    "estimate",
    "true_mean",
    "bias",
    "sigma_z_mean",
    "shots_plus",
    "shots_minus",
    "stderr",
    "bias_bound",
    "pulse_area_2gt_amax",
    "gamma",
    "t",
    "shots",
    "tail_probability",
    "unsafe",
    "seed",
)


class ConfigError(ValueError):
    pass


_complex = {
    "oneOf": [
        {"type": "number"},
        {"type": "string"},
        {"type": "array", "items": {"type": "number"}, "minItems": 2, "maxItems": 2},
    ]
}
_grid = {
    "type": "object",
    "additionalProperties": False,
    "required": ["start", "stop", "steps"],
    "properties": {"start": {"type": "number"}, "stop": {"type": "number"}, "steps": {"type": "integer", "minimum": 1}},
}
_mode = {"enum": ["x", "y", "z"]}
_protocol = {
    "type": "object",
    "additionalProperties": False,
    "required": ["alpha_max"],
    "properties": {
        "gamma": {"type": "number"},
        "t": {"type": "number", "exclusiveMinimum": 0},
        "alpha_max": {"type": "number", "minimum": 0},
        "zone_half_width": {"type": "number", "exclusiveMinimum": 0},
        "shots": {"type": "integer", "minimum": 0},
        "seed": {"type": "integer", "minimum": 0},
        "unsafe": {"type": "boolean"},
    },
}
_single_mode = {
    "type": "object",
    "additionalProperties": False,
    "minProperties": 1,
    "maxProperties": 1,
    "properties": {
        "fock": {"type": "integer", "minimum": 0},
        "coherent": _complex,
        "amplitudes": {"type": "array", "items": _complex, "minItems": 1},
    },
}
_state = {
    "type": "object",
    "required": ["kind"],
    "properties": {"kind": {"enum": list(StateSpec.KINDS)}},
    "allOf": [
        {
            "if": {"properties": {"kind": {"const": "fock"}}},
            "then": {
                "additionalProperties": False,
                "properties": {
                    "kind": {},
                    "occupations": {"type": "object", "propertyNames": _mode, "additionalProperties": {"type": "integer", "minimum": 0}},
                },
            },
        },
        {
            "if": {"properties": {"kind": {"const": "coherent"}}},
            "then": {
                "additionalProperties": False,
                "required": ["alpha"],
                "properties": {"kind": {}, "alpha": {"type": "object", "propertyNames": _mode, "additionalProperties": _complex}},
            },
        },
        {
            "if": {"properties": {"kind": {"const": "su2_coherent"}}},
            "then": {
                "additionalProperties": False,
                "required": ["N0"],
                "properties": {
                    "kind": {},
                    "tau": _complex,
                    "N0": {"type": "integer", "minimum": 0},
                    "modes": {"type": "array", "items": _mode, "minItems": 2, "maxItems": 2},
                },
            },
        },
        {
            "if": {"properties": {"kind": {"const": "superposition"}}},
            "then": {
                "additionalProperties": False,
                "required": ["components"],
                "properties": {
                    "kind": {},
                    "components": {
                        "type": "array",
                        "minItems": 1,
                        "items": {
                            "type": "object",
                            "additionalProperties": False,
                            "required": ["state"],
                            "properties": {"weight": _complex, "state": {"$ref": "#/$defs/state"}},
                        },
                    },
                },
            },
        },
        {
            "if": {"properties": {"kind": {"const": "product"}}},
            "then": {
                "additionalProperties": False,
                "required": ["modes"],
                "properties": {"kind": {}, "modes": {"type": "object", "propertyNames": _mode, "additionalProperties": _single_mode}},
            },
        },
    ],
}

RUN_CONFIG_SCHEMA: dict[str, Any] = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "additionalProperties": False,
    "$defs": {"state": _state},
    "properties": {
        "layout": {
            "type": "object",
            "additionalProperties": False,
            "required": ["modes", "dims"],
            "properties": {
                "modes": {"type": "array", "items": _mode, "minItems": 1, "maxItems": 3, "uniqueItems": True},
                "dims": {"type": "array", "items": {"type": "integer", "minimum": 2}, "minItems": 1, "maxItems": 3},
            },
        },
        "observable": {
            "type": "object",
            "additionalProperties": False,
            "required": ["name"],
            "properties": {
                "name": {"enum": ["n", "lz", "cxy", "qx", "px", "custom"]},
                "modes": {"type": "array", "items": _mode, "minItems": 1, "maxItems": 2},
                "matrix_file": {"type": "string"},
            },
        },
        "state": {"$ref": "#/$defs/state"},
        "protocol": _protocol,
        "sweep": {
            "type": "object",
            "additionalProperties": False,
            "required": ["axis"],
            "properties": {
                "axis": {"enum": ["t", "gamma", "M", "shots"]},
                "values": {"type": "array", "items": {"type": "number"}, "minItems": 1},
                "grid": _grid,
            },
        },
        "rabi": {
            "type": "object",
            "additionalProperties": False,
            "required": ["gamma", "t_grid"],
            "properties": {"gamma": {"type": "number"}, "t_grid": _grid},
        },
        "parity": {
            "type": "object",
            "additionalProperties": False,
            "required": ["N0"],
            "properties": {
                "N0": {"type": "integer", "minimum": 1},
                "tau": _complex,
                "gamma_jc": {"type": "number"},
                "scan": _grid,
                "dim": {"type": "integer", "minimum": 2},
                "protocol": _protocol,
            },
        },
        "output": {
            "type": "object",
            "additionalProperties": False,
            "properties": {"path": {"type": "string"}, "format": {"enum": ["csv", "json"]}},
        },
    },
}

REQUIRED_SECTIONS = {
    "estimate": ("layout", "observable", "state", "protocol"),
    "sweep": ("layout", "observable", "state", "protocol", "sweep"),
    "rabi": ("layout", "observable", "state", "rabi"),
    "parity": ("parity",),
}

_number_or_null = {"type": ["number", "integer", "boolean", "null", "string"]}
RESULT_SCHEMA: dict[str, Any] = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "additionalProperties": False,
    "required": ["command", "metadata", "columns", "records"],
    "properties": {
        "command": {"enum": ["estimate", "sweep", "rabi", "parity"]},
        "metadata": {
            "type": "object",
            "additionalProperties": False,
            "required": ["version", "git_revision", "config_sha256", "seed"],
            "properties": {
                "version": {"type": "string"},
                "git_revision": {"type": "string"},
                "config_sha256": {"type": "string", "pattern": "^[0-9a-f]{64}$"},
                "seed": {"type": ["integer", "null"]},
                "config": {"type": "object"},
            },
        },
        "columns": {"type": "array", "items": {"type": "string"}},
        "records": {"type": "array", "items": {"type": "object", "additionalProperties": _number_or_null}},
        "summary": {"type": "object"},
    },
}


# --- config handling ------------------------------------------------------------


def _validate_config(cfg: dict, command: str):
    try:
        jsonschema.validate(cfg, RUN_CONFIG_SCHEMA)
    except jsonschema.ValidationError as exc:
        where = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise ConfigError(f"config invalid at {where}: {exc.message}") from None
    missing = [s for s in REQUIRED_SECTIONS.get(command, ()) if s not in cfg]
    if missing:
        raise ConfigError(f"'{command}' needs config section(s): {', '.join(missing)}")


def _apply_overrides(cfg: dict, args, command: str) -> dict:
    cfg = copy.deepcopy(cfg)
    if command == "parity":
        target = cfg["parity"].setdefault("protocol", {"alpha_max": cfg["parity"]["N0"]}) if (args.shots is not None or args.seed is not None or args.unsafe) else None
    else:
        target = cfg.get("protocol")
        if target is None and (args.shots is not None or args.seed is not None):
            raise ConfigError("--shots/--seed need a protocol section")
    if target is not None:
        if args.shots is not None:
            target["shots"] = args.shots
        if args.seed is not None:
            target["seed"] = args.seed
        if args.unsafe:
            target["unsafe"] = True
    return cfg


def _protocol_from(section: dict) -> ProtocolConfig:
    zone = section.get("zone_half_width", 0.4)
    alpha_max = float(section["alpha_max"])
    gamma, t = section.get("gamma"), section.get("t")
    if t is None:
        gamma, t = calibrate(alpha_max, zone, gamma=gamma)
    elif gamma is None:
        gamma, t = calibrate(alpha_max, zone, t=t)
    shots = int(section.get("shots", 0))
    if shots > 0 and "seed" not in section:
        raise ConfigError("a seed is mandatory for runs with shots > 0")
    return ProtocolConfig(
        gamma=float(gamma),
        t=float(t),
        window=SpectralWindow(alpha_max, zone),
        shots=shots,
        rng_seed=int(section.get("seed", 0)),
        unsafe=bool(section.get("unsafe", False)),
    )


def load_matrix_file(path: str | Path) -> np.ndarray:
    """Read a dense complex matrix in the documented plain-text format."""
    lines = [ln.split("#", 1)[0].strip() for ln in Path(path).read_text().splitlines()]
    tokens = " ".join(ln for ln in lines if ln).split()
    if not tokens:
        raise ConfigError(f"matrix file {path} is empty")
    try:
        d = int(tokens[0])
        values = [float(x) for x in tokens[1:]]
    except ValueError as exc:
        raise ConfigError(f"matrix file {path}: {exc}") from None
    if d < 1 or len(values) != 2 * d * d:
        raise ConfigError(f"matrix file {path}: expected {2 * d * d} numbers after the dimension, got {len(values)}")
    v = np.asarray(values).reshape(d * d, 2)
    return (v[:, 0] + 1j * v[:, 1]).reshape(d, d)


def _layout_from(cfg: dict) -> ModeLayout:
    section = cfg["layout"]
    return ModeLayout(tuple(section["modes"]), tuple(section["dims"]))


def _observable_from(cfg: dict, layout: ModeLayout, base: Path) -> HermitianOperator:
    section = cfg["observable"]
    if section["name"] == "custom":
        if "matrix_file" not in section:
            raise ConfigError("custom observable needs matrix_file")
        path = Path(section["matrix_file"])
        m = load_matrix_file(path if path.is_absolute() else base / path)
        if m.shape[0] != layout.vib_dim:
            raise ConfigError(f"custom matrix has dim {m.shape[0]}, layout vibrational dim is {layout.vib_dim}")
        return HermitianOperator(m, layout.vib_space)
    return observable_by_name(section["name"], layout, section.get("modes"))


def _grid_values(section: dict) -> np.ndarray:
    g = ScanGrid(section["start"], section["stop"], section["steps"])
    return g.values()


# --- output ---------------------------------------------------------------------------


def _git_revision() -> str:
    try:
        out = subprocess.run(
            ["git", "rev-parse", "--short", "HEAD"],
            cwd=Path(__file__).resolve().parent,
            capture_output=True,
            text=True,
            timeout=5,
        )
    except (OSError, subprocess.SubprocessError):
        return "unknown"
    return out.stdout.strip() or "unknown"


def config_hash(cfg: dict) -> str:
    return hashlib.sha256(json.dumps(cfg, sort_keys=True, separators=(",", ":")).encode()).hexdigest()


def _fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if v is None:
        return ""
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return format(float(v), ".16e")
    return str(v)


def _plain(v):
    if isinstance(v, np.generic):
        return v.item()
    return v


def _render(command: str, columns, records, metadata: dict, fmt: str, summary: dict | None = None) -> str:
    if fmt == "json":
        doc = {
            "command": command,
            "metadata": metadata,
            "columns": list(columns),
            "records": [{c: _plain(r[c]) for c in columns} for r in records],
        }
        if summary is not None:
            doc["summary"] = summary
        return json.dumps(doc, indent=2) + "\n"
    buf = io.StringIO()
    buf.write(f"# ionmeter {metadata['version']} {command}\n")
    buf.write(f"# git_revision: {metadata['git_revision']}\n")
    buf.write(f"# seed: {metadata['seed']}\n")
    buf.write(f"# config_sha256: {metadata['config_sha256']}\n")
    for k, v in (summary or {}).items():
        buf.write(f"# {k}: {json.dumps(v)}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for r in records:
        w.writerow([_fmt(r[c]) for c in columns])
    return buf.getvalue()


def _table_records(table: dict, columns) -> list[dict]:
    n = len(next(iter(table.values())))
    return [{c: table[c][i] for c in columns} for i in range(n)]


# --- commands ---------------------------------------------------------------------------


def _run_estimate(cfg, base):
    layout = _layout_from(cfg)
    A = _observable_from(cfg, layout, base)
    psi = StateSpec.from_dict(cfg["state"]).build(layout)
    pcfg = _protocol_from(cfg["protocol"])
    r = estimate_mean(psi, A, pcfg)
    truth = expectation(psi, A)
    record = r.to_dict()
    record.update(true_mean=truth, bias=r.estimate - truth)
    return ESTIMATE_COLUMNS, [record], (pcfg.rng_seed if pcfg.shots else None), None


def _run_sweep(cfg, base):
    layout = _layout_from(cfg)
    A = _observable_from(cfg, layout, base)
    psi = StateSpec.from_dict(cfg["state"]).build(layout)
    pcfg = _protocol_from(cfg["protocol"])
    s = cfg["sweep"]
    if "values" in s:
        grid = s["values"]
    elif "grid" in s:
        grid = _grid_values(s["grid"])
    else:
        raise ConfigError("sweep needs 'values' or 'grid'")
    if s["axis"] in ("M", "shots") and "seed" not in cfg["protocol"]:
        raise ConfigError("a seed is mandatory for shot sweeps")
    table = estimator_sweep(psi, A, s["axis"], grid, pcfg)
    records = _table_records(table, SWEEP_COLUMNS)
    for r in records:
        r["shots"] = int(r["shots"])
    return SWEEP_COLUMNS, records, (pcfg.rng_seed if pcfg.shots or s["axis"] in ("M", "shots") else None), None


def _run_rabi(cfg, base):
    layout = _layout_from(cfg)
    A = _observable_from(cfg, layout, base)
    psi = StateSpec.from_dict(cfg["state"]).build(layout)
    table = rabi_scan(psi, A, float(cfg["rabi"]["gamma"]), _grid_values(cfg["rabi"]["t_grid"]))
    return RABI_COLUMNS, _table_records(table, RABI_COLUMNS), None, None


def _run_parity(cfg, base):
    p = cfg["parity"]
    overlay = _protocol_from(p["protocol"]) if "protocol" in p else None
    scan = ScanGrid(p["scan"]["start"], p["scan"]["stop"], p["scan"]["steps"]) if "scan" in p else None
    demo = ParityDemoConfig(
        N0=int(p["N0"]),
        tau=parse_complex(p.get("tau", 1.0)),
        gamma_jc=float(p.get("gamma_jc", 1.0)),
        scan=scan,
        overlay=overlay,
        dim=p.get("dim"),
    )
    report = parity_demo(demo)
    seed = overlay.rng_seed if overlay is not None and overlay.shots else None
    return PARITY_COLUMNS, _table_records(report.table, PARITY_COLUMNS), seed, report.summary()


RUNNERS = {"estimate": _run_estimate, "sweep": _run_sweep, "rabi": _run_rabi, "parity": _run_parity}


def _load_config(path: str | None) -> dict:
    if path is None:
        raise ConfigError("--config is required")
    try:
        with open(path) as fh:
            cfg = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}") from None
    if not isinstance(cfg, dict):
        raise ConfigError("config must be a JSON object")
    return cfg


def run_command(command: str, args) -> int:
    cfg = _load_config(args.config)
    _validate_config(cfg, command)
    cfg = _apply_overrides(cfg, args, command)
    _validate_config(cfg, command)
    base = Path(args.config).resolve().parent
    columns, records, seed, summary = RUNNERS[command](cfg, base)
    out_section = cfg.get("output", {})
    fmt = args.format or out_section.get("format", "csv")
    path = args.output or out_section.get("path")
    metadata = {"version": __version__, "git_revision": _git_revision(), "config_sha256": config_hash(cfg), "seed": seed}
    if fmt == "json":
        metadata["config"] = cfg
    text = _render(command, columns, records, metadata, fmt, summary)
    if path:
        Path(path).write_text(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def run_validate(args) -> int:
    results = run_validation()
    for r in results:
        print(r.line())
    ok = all(r.passed for r in results)
    print(f"{sum(r.passed for r in results)}/{len(results)} checks passed")
    return EXIT_OK if ok else EXIT_NUMERICAL


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON run configuration")
    common.add_argument("--output", help="output file (default: config output.path or stdout)")
    common.add_argument("--format", choices=("csv", "json"))
    common.add_argument("--shots", type=int, help="override protocol shots (0 = exact expectation)")
    common.add_argument("--seed", type=int, help="override protocol RNG seed")
    common.add_argument("--unsafe", action="store_true", help="allow pulse areas outside the linearisability zone")

    parser = argparse.ArgumentParser(prog="ionmeter", description="Indirect measurement of trapped-ion vibrational mean values.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("estimate", parents=[common], help="run the protocol once")
    sub.add_parser("sweep", parents=[common], help="estimator sweep over t, gamma or shots")
    sub.add_parser("rabi", parents=[common], help="eigenstate Rabi scan")
    sub.add_parser("parity", parents=[common], help="parity-effect demonstration")
    sub.add_parser("validate", help="run the identity suite")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "validate":
            return run_validate(args)
        return run_command(args.command, args)
    except BrokenPipeError:
        # downstream reader closed early (e.g. ``| head``)
        os.dup2(os.open(os.devnull, os.O_WRONLY), sys.stdout.fileno())
        return EXIT_OK
    except ZoneViolation as exc:
        print(f"zone violation: {exc}", file=sys.stderr)
        return EXIT_ZONE
    except (np.linalg.LinAlgError, FloatingPointError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (ConfigError, ValueError, KeyError, TypeError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
