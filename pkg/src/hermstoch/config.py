"""Structured run configuration: defaults, TOML file, flag overrides.

Precedence is defaults < config file < command-line flags.  The merged
configuration is snapshotted into each run directory's manifest so a run
can be reproduced bit-exactly from the manifest alone.
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

try:
    import tomllib
except ModuleNotFoundError:  # python < 3.11
    import tomli as tomllib

DEFAULTS = {
    "common": {
        "out": "runs/latest",
        "seed": 0,
    },
    "transform": {
        "function": "gaussian",
        "dimension": 1,
        "max_degree": 20,
        "grid_halfwidth": 2.0,
        "grid_points": 41,
    },
    "check-invariance": {
        "model": "stroock-sphere",
        "manifold": "",
        "points": 100,
        "tolerance": 0.0,
        "stratonovich": True,
    },
    "simulate-sde": {
        "model": "stroock-sphere",
        "x0": [],
        "horizon": 1.0,
        "dt": 1e-3,
        "paths": 1,
    },
    "simulate-spde": {
        "model": "gaussian-profile-spde",
        "max_degree": 60,
        "x0": [0.0],
        "horizon": 0.5,
        "dt": 1e-3,
        "method": "both",
        "p": "auto",
    },
    "compare": {
        "p": 0.0,
        "first": "",
        "second": "",
    },
    "report": {
        "run": "",
    },
}


class ConfigError(Exception):
    """Malformed or unreadable configuration."""


def load_config_file(path) -> dict:
    try:
        with open(path, "rb") as fh:
            return tomllib.load(fh)
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}") from None
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"malformed config {path}: {exc}") from None


def merge_config(subcommand: str, file_cfg: dict | None = None,
                 overrides: dict | None = None) -> dict:
    """Flat settings dict for one subcommand (common keys included)."""
    if subcommand not in DEFAULTS:
        raise ConfigError(f"unknown subcommand {subcommand!r}")
    cfg = dict(DEFAULTS["common"])
    cfg.update(DEFAULTS[subcommand])
    if file_cfg:
        for section in ("common", subcommand):
            table = file_cfg.get(section, {})
            if not isinstance(table, dict):
                raise ConfigError(f"config section [{section}] must be a table")
            for key, value in table.items():
                if key not in cfg:
                    raise ConfigError(f"unknown key {key!r} in section [{section}]")
                cfg[key] = value
    if overrides:
        for key, value in overrides.items():
            if value is not None:
                cfg[key] = value
    return cfg


def _toml_value(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (int, float)):
        return repr(value)
    if isinstance(value, str):
        return json.dumps(value)
    if isinstance(value, (list, tuple)):
        return "[" + ", ".join(_toml_value(v) for v in value) + "]"
    raise TypeError(f"cannot render {type(value).__name__} as TOML")


def render_toml(tables: dict) -> str:
    """Serialize a two-level dict of scalar/list settings to TOML text."""
    lines = []
    for section, table in tables.items():
        lines.append(f"[{section}]")
        for key, value in table.items():
            lines.append(f"{key} = {_toml_value(value)}")
        lines.append("")
    return "\n".join(lines)


def show_config(subcommand: str | None = None) -> str:
    """Full default configuration (all sections, or one subcommand's view)."""
    if subcommand is None:
        return render_toml(DEFAULTS)
    return render_toml({"common": DEFAULTS["common"],
                        subcommand: DEFAULTS[subcommand]})


def write_manifest(out_dir, subcommand: str, cfg: dict, argv) -> Path:
    import numpy
    import scipy

    from . import __version__

    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    manifest = {
        "subcommand": subcommand,
        "argv": list(argv),
        "config": cfg,
        "versions": {
            "python": sys.version.split()[0],
            "numpy": numpy.__version__,
            "scipy": scipy.__version__,
            "hermstoch": __version__,
        },
    }
    path = out_dir / "manifest.json"
    with open(path, "w") as fh:
        json.dump(manifest, fh, indent=2)
    return path
