"""Experiment configuration: JSON parsing, defaults and validation."""

from __future__ import annotations

import copy
import json
import math
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Any

MODES = ("eos-check", "fluid-certify", "fluid-simulate", "plasma-certify", "plasma-simulate",
         "scan-nbar", "scan-lambda")

DEFAULTS: dict[str, Any] = {
    "mode": "eos-check",
    "eos": {"gamma": 5.0 / 3.0, "a0": 1.0, "entropy_law": "cosh"},
    # nbar = null: use the scan-nbar result; grid.N = null: 2048 (fluid) or 4096 (plasma)
    "background": {"nbar": None, "sbar": 0.0},
    "plasma": {"nbar": 0.01, "sbar": 0.0, "e": 1.0, "m": 1.0, "c": 1.0, "units": "nondimensional"},
    "shapes": {
        "kappa": 8.0, "mu": 0.5, "edge": 2,
        "delta": 0.004, "sigma": 0.5, "lambda": 0.2, "plasma_edge": 2,
    },
    "grid": {"N": None, "r_max": 4.0, "cfl": 0.4, "t_end": None, "sample_every": 1},
    "scan": {"start": 1.0, "stop": 1e-12, "lambda_start": 1.0, "max_doublings": 60},
    "eos_grid": {"n_min": 0.01, "n_max": 10.0, "n_points": 40, "s_max": 2.0, "s_points": 21},
    "breakdown": {"grad_factor": 100.0, "steepening": 0.15},
    "output": {"report": "report.json", "series": "series.csv", "profile": None},
}

_POSITIVE = {
    ("eos", "gamma"), ("eos", "a0"), ("plasma", "nbar"), ("plasma", "e"), ("plasma", "m"), ("plasma", "c"),
    ("grid", "r_max"), ("grid", "cfl"), ("scan", "start"), ("scan", "stop"), ("scan", "lambda_start"),
    ("eos_grid", "n_min"), ("eos_grid", "n_max"), ("breakdown", "grad_factor"), ("breakdown", "steepening"),
    ("shapes", "mu"), ("shapes", "delta"),
}
_NONNEG = {("background", "sbar"), ("plasma", "sbar"), ("shapes", "kappa"), ("shapes", "sigma"),
           ("shapes", "lambda"), ("eos_grid", "s_max")}
_INTS = {("shapes", "edge"), ("shapes", "plasma_edge"), ("grid", "N"), ("grid", "sample_every"),
         ("scan", "max_doublings"), ("eos_grid", "n_points"), ("eos_grid", "s_points")}
_CHOICES = {("eos", "entropy_law"): ("cosh", "exp"), ("plasma", "units"): ("nondimensional", "cgs")}


class ConfigError(ValueError):
    """Invalid configuration; the message names the offending field."""


@dataclass
class ExperimentConfig:
    raw: dict

    @property
    def mode(self) -> str:
        return self.raw["mode"]

    def section(self, name: str) -> dict:
        return self.raw[name]

    def to_json(self) -> str:
        return json.dumps(self.raw, sort_keys=True, indent=2)


def _check_number(path: str, v, positive: bool, nonneg: bool, integer: bool) -> None:
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ConfigError(f"{path}: expected a number, got {v!r}")
    if integer and not float(v).is_integer():
        raise ConfigError(f"{path}: expected an integer, got {v!r}")
    if not math.isfinite(v):
        raise ConfigError(f"{path}: must be finite")
    if positive and not v > 0:
        raise ConfigError(f"{path}: must be positive, got {v!r}")
    if nonneg and v < 0:
        raise ConfigError(f"{path}: must be non-negative, got {v!r}")


def validate(raw: dict) -> ExperimentConfig:
    """Fill defaults, reject unknown keys and out-of-range values."""
    if not isinstance(raw, dict):
        raise ConfigError("config: top level must be a JSON object")
    cfg = copy.deepcopy(DEFAULTS)
    for key, val in raw.items():
        if key not in cfg:
            raise ConfigError(f"{key}: unknown key")
        if isinstance(cfg[key], dict):
            if not isinstance(val, dict):
                raise ConfigError(f"{key}: expected an object")
            for sub, v in val.items():
                if sub not in cfg[key]:
                    raise ConfigError(f"{key}.{sub}: unknown key")
                cfg[key][sub] = v
        else:
            cfg[key] = val
    if cfg["mode"] not in MODES:
        raise ConfigError(f"mode: must be one of {', '.join(MODES)}, got {cfg['mode']!r}")
    for sec, body in cfg.items():
        if not isinstance(body, dict):
            continue
        for k, v in body.items():
            path = f"{sec}.{k}"
            if (sec, k) in _CHOICES:
                if v not in _CHOICES[(sec, k)]:
                    raise ConfigError(f"{path}: must be one of {_CHOICES[(sec, k)]}")
                continue
            if sec == "output":
                if v is not None and not isinstance(v, str):
                    raise ConfigError(f"{path}: expected a file name or null")
                continue
            if v is None and (sec, k) in {("background", "nbar"), ("grid", "t_end"), ("grid", "N")}:
                continue
            _check_number(path, v, (sec, k) in _POSITIVE or (sec, k) in _INTS or (sec, k) in {
                ("background", "nbar"), ("grid", "t_end")}, (sec, k) in _NONNEG, (sec, k) in _INTS)
            if (sec, k) in _INTS:
                body[k] = int(v)
    if not cfg["eos"]["gamma"] > 1.0:
        raise ConfigError("eos.gamma: must exceed 1")
    if cfg["mode"].startswith(("fluid", "scan-nbar")) and not cfg["eos"]["gamma"] < 2.0:
        raise ConfigError("eos.gamma: relativistic fluid modes require gamma < 2")
    if cfg["grid"]["cfl"] > 1.0:
        raise ConfigError("grid.cfl: must lie in (0, 1]")
    if cfg["grid"]["N"] is not None and cfg["grid"]["N"] < 8:
        raise ConfigError("grid.N: need at least 8 cells")
    if not cfg["grid"]["r_max"] > 1.0:
        raise ConfigError("grid.r_max: must exceed 1")
    if cfg["eos_grid"]["n_points"] < 3 or cfg["eos_grid"]["s_points"] < 3:
        raise ConfigError("eos_grid: need at least 3 points per axis")
    if cfg["scan"]["stop"] >= cfg["scan"]["start"]:
        raise ConfigError("scan.stop: must be below scan.start")
    return ExperimentConfig(cfg)


def load_raw(source=None) -> dict:
    """Read JSON text from a path, a JSON string or stdin (``None`` or "-") without validating."""
    if source is None or source == "-":
        text = sys.stdin.read()
    elif isinstance(source, Path) or not source.lstrip().startswith(("{", "[")):
        try:
            text = Path(source).read_text()
        except OSError as exc:
            raise ConfigError(f"config: cannot read {source}: {exc.strerror}") from None
    else:
        text = source
    try:
        raw = json.loads(text) if text.strip() else {}
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config: malformed JSON ({exc.msg} at line {exc.lineno})") from None
    if not isinstance(raw, dict):
        raise ConfigError("config: top level must be a JSON object")
    return raw


def parse_config(source=None) -> ExperimentConfig:
    """Parse and validate a config from a dict, a path, a JSON string or stdin."""
    return validate(source if isinstance(source, dict) else load_raw(source))
