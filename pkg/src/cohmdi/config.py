"""Run configuration: JSON schema, validation, and the figure presets.

A config file is a single JSON object with sections channel / source /
keyrate / oracle / output plus a seed.  Unknown keys are rejected and all
numeric ranges are enforced here so the physics modules can assume clean
inputs.  Presets bake in the sweeps behind the headline figures; CLI
flags override file values, which override preset values.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Any

import numpy as np


class ConfigError(ValueError):
    """Invalid run configuration; the message names the offending field."""


def _require_keys(section: dict, allowed: set[str], path: str) -> None:
    unknown = set(section) - allowed
    if unknown:
        raise ConfigError(f"{path}: unknown key(s) {sorted(unknown)}")


def _as_float(value, path: str, lo=None, hi=None, lo_open=False, hi_open=False) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{path}: expected a number, got {value!r}")
    x = float(value)
    if not math.isfinite(x):
        raise ConfigError(f"{path}: must be finite, got {x}")
    if lo is not None and (x <= lo if lo_open else x < lo):
        raise ConfigError(f"{path}: must be {'>' if lo_open else '>='} {lo}, got {x}")
    if hi is not None and (x >= hi if hi_open else x > hi):
        raise ConfigError(f"{path}: must be {'<' if hi_open else '<='} {hi}, got {x}")
    return x


@dataclass(frozen=True)
class LossGrid:
    start: float
    stop: float
    step: float

    def values(self) -> np.ndarray:
        n = int(round((self.stop - self.start) / self.step)) + 1
        return self.start + self.step * np.arange(n)


@dataclass(frozen=True)
class RunConfig:
    """Validated run description shared by the keyrate and sweep commands."""

    p_d: float = 1e-8
    loss_db: float | None = None
    loss_grid: LossGrid | None = None
    epsilon_list: tuple = (1e-6,)
    epsilon_table: np.ndarray | None = None
    gamma_sq_list: tuple = (0.0,)
    alpha: float | str = "optimize"
    f_e: float = 1.16
    p_key: float = 1.0
    n_max: int | None = None
    out_path: str | None = None
    out_format: str = "csv"
    seed: int = 0


def _parse_epsilon(value, path: str):
    """Either a uniform scalar, a list of scalars (sweep), or a 3x3 table."""
    if isinstance(value, (int, float)) and not isinstance(value, bool):
        return (_as_float(value, path, lo=0.0, hi=1.0),), None
    if isinstance(value, list) and value and all(
        isinstance(v, (int, float)) and not isinstance(v, bool) for v in value
    ):
        return tuple(_as_float(v, f"{path}[{i}]", lo=0.0, hi=1.0)
                     for i, v in enumerate(value)), None
    if isinstance(value, list) and len(value) == 3:
        table = np.empty((3, 3))
        for i, row in enumerate(value):
            if not isinstance(row, list) or len(row) != 3:
                raise ConfigError(f"{path}: per-pair table must be 3x3")
            for j, v in enumerate(row):
                table[i, j] = _as_float(v, f"{path}[{i}][{j}]", lo=0.0, hi=1.0)
        return (float("nan"),), table
    raise ConfigError(f"{path}: expected a scalar, list of scalars, or 3x3 table")


def validate_config(raw: dict) -> RunConfig:
    """Check one parsed JSON object against the schema and ranges."""
    if not isinstance(raw, dict):
        raise ConfigError("config root must be a JSON object")
    _require_keys(raw, {"channel", "source", "keyrate", "oracle", "output", "seed"},
                  "config")
    cfg: dict[str, Any] = {}

    channel = raw.get("channel", {})
    _require_keys(channel, {"p_d", "loss_db", "loss_grid"}, "channel")
    cfg["p_d"] = _as_float(channel.get("p_d", 1e-8), "channel.p_d", lo=0.0, hi=1.0,
                           hi_open=True)
    if "loss_db" in channel and "loss_grid" in channel:
        raise ConfigError("channel: give either loss_db or loss_grid, not both")
    if "loss_db" in channel:
        cfg["loss_db"] = _as_float(channel["loss_db"], "channel.loss_db", lo=0.0)
    if "loss_grid" in channel:
        grid = channel["loss_grid"]
        _require_keys(grid, {"start", "stop", "step"}, "channel.loss_grid")
        start = _as_float(grid.get("start", 0.0), "channel.loss_grid.start", lo=0.0)
        stop = _as_float(grid.get("stop", 30.0), "channel.loss_grid.stop", lo=start)
        step = _as_float(grid.get("step", 0.5), "channel.loss_grid.step", lo=0.0,
                         lo_open=True)
        cfg["loss_grid"] = LossGrid(start, stop, step)

    source = raw.get("source", {})
    _require_keys(source, {"epsilon", "gamma_sq", "alpha"}, "source")
    if "epsilon" in source:
        cfg["epsilon_list"], cfg["epsilon_table"] = _parse_epsilon(
            source["epsilon"], "source.epsilon"
        )
    gamma_sq = source.get("gamma_sq", 0.0)
    if isinstance(gamma_sq, list):
        cfg["gamma_sq_list"] = tuple(
            _as_float(v, f"source.gamma_sq[{i}]", lo=0.0) for i, v in enumerate(gamma_sq)
        )
    else:
        cfg["gamma_sq_list"] = (_as_float(gamma_sq, "source.gamma_sq", lo=0.0),)
    alpha = source.get("alpha", "optimize")
    if alpha != "optimize":
        alpha = _as_float(alpha, "source.alpha", lo=0.0, lo_open=True)
    cfg["alpha"] = alpha

    keyrate = raw.get("keyrate", {})
    _require_keys(keyrate, {"f_e", "p_key"}, "keyrate")
    cfg["f_e"] = _as_float(keyrate.get("f_e", 1.16), "keyrate.f_e", lo=1.0)
    cfg["p_key"] = _as_float(keyrate.get("p_key", 1.0), "keyrate.p_key", lo=0.0,
                             lo_open=True, hi=1.0)

    oracle = raw.get("oracle", {})
    _require_keys(oracle, {"n_max"}, "oracle")
    n_max = oracle.get("n_max")
    if n_max is not None:
        if isinstance(n_max, bool) or not isinstance(n_max, int) or n_max < 1:
            raise ConfigError(f"oracle.n_max: expected a positive integer, got {n_max!r}")
    cfg["n_max"] = n_max

    output = raw.get("output", {})
    _require_keys(output, {"path", "format"}, "output")
    if "path" in output and output["path"] is not None:
        if not isinstance(output["path"], str):
            raise ConfigError("output.path: expected a string")
        cfg["out_path"] = output["path"]
    fmt = output.get("format", "csv")
    if fmt not in ("csv", "json"):
        raise ConfigError(f"output.format: expected 'csv' or 'json', got {fmt!r}")
    cfg["out_format"] = fmt

    seed = raw.get("seed", 0)
    if isinstance(seed, bool) or not isinstance(seed, int) or seed < 0:
        raise ConfigError(f"seed: expected a nonnegative integer, got {seed!r}")
    cfg["seed"] = seed

    return RunConfig(**cfg)


def load_config(path: str) -> RunConfig:
    try:
        with open(path) as fh:
            raw = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config file {path} is not valid JSON: {exc}") from exc
    return validate_config(raw)


# Sweep presets behind the three headline figures.  fig_a4 runs at
# epsilon = 1e-6 so both third-state intensities terminate inside the loss
# window and the comparison stays visible.
PRESETS: dict[str, dict] = {
    "fig2": {
        "channel": {"p_d": 1e-8, "loss_grid": {"start": 0.0, "stop": 30.0, "step": 0.5}},
        "source": {"epsilon": [0.0, 1e-7, 1e-6, 1e-5, 1e-4], "gamma_sq": 0.0,
                   "alpha": "optimize"},
        "keyrate": {"f_e": 1.16, "p_key": 1.0},
        "output": {"format": "csv"},
    },
    "fig_a3": {
        "channel": {"p_d": 1e-8, "loss_grid": {"start": 0.0, "stop": 30.0, "step": 0.5}},
        "source": {"epsilon": [0.0, 1e-7, 1e-6, 1e-5, 1e-4], "gamma_sq": 0.0,
                   "alpha": "optimize"},
        "keyrate": {"f_e": 1.16, "p_key": 1.0},
        "output": {"format": "csv"},
    },
    "fig_a4": {
        "channel": {"p_d": 1e-8, "loss_grid": {"start": 0.0, "stop": 30.0, "step": 0.5}},
        "source": {"epsilon": 1e-6, "gamma_sq": [0.0, 1e-5], "alpha": "optimize"},
        "keyrate": {"f_e": 1.16, "p_key": 1.0},
        "output": {"format": "csv"},
    },
}


def merge_raw(base: dict, override: dict) -> dict:
    """Recursive dict merge; override wins on leaves."""
    merged = dict(base)
    for key, value in override.items():
        if isinstance(value, dict) and isinstance(merged.get(key), dict):
            merged[key] = merge_raw(merged[key], value)
        else:
            merged[key] = value
    return merged
