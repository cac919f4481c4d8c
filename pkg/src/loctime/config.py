"""Declarative experiment configuration.

A config is one flat YAML (or JSON) mapping. Recognized keys::

    process       brownian | ou | constant | linear | constant_coeff
    theta, mean, sigma, drift, slope      process parameters (where relevant)
    horizon       T (default 1.0)
    grid_log2     n = 2**grid_log2 steps (or num_steps)
    origin        X_0 (default 0.0)
    seed          master seed (u64)
    paths         number of paths
    stream        first RNG stream for simulate/estimate (default 0)
    scheme        scheme tag for converge / as-converge
    schemes       list of scheme tags for estimate
    level         level of the local time (default 0.0)
    target        limit descriptor (defaults from the scheme)
    eps           width for estimate
    ladder        list of widths (or ladder_log2: [first, last], eps = 2**-k)
    oracle_refine oracle grid is this many times finer (default 1)
    rate_window   [lo, hi] accepted fitted-rate interval, or null
    terminal_max  threshold on the finest-rung error, or null
    min_fraction  threshold for the almost-sure experiment
    path_csv      estimate reads this path instead of simulating
    reversal      converge runs the time-reversal experiment as well
    width         band width of occupation / downcrossing oracles
    svg           emit the log-log chart (default true)
    n_jobs, chunk_size, holder_delta, holder_paths, keep_per_path

Command-line overrides are applied on top of the file.
"""
from __future__ import annotations

import json
from pathlib import Path as FsPath

import yaml

from .exceptions import ConfigurationError
from .harness import EpsilonLadder, ExperimentSpec, make_process
from .paths import GridSpec

__all__ = ["DEFAULTS", "load_config", "parse_override", "apply_overrides",
           "grid_from", "process_from", "ladder_from", "experiment_from"]

DEFAULTS = {
    "process": "brownian",
    "horizon": 1.0,
    "grid_log2": 10,
    "origin": 0.0,
    "seed": 0,
    "paths": 1,
    "stream": 0,
    "level": 0.0,
    "oracle_refine": 1,
    "rate_window": [0.15, 0.60],
    "terminal_max": None,
    "min_fraction": 0.95,
    "width": 2.0**-6,
    "svg": True,
    "n_jobs": 1,
    "chunk_size": 32,
    "holder_delta": 0.45,
    "holder_paths": 16,
    "keep_per_path": False,
    "reversal": False,
}

_PROCESS_KEYS = {
    "brownian": (),
    "ou": ("theta", "mean", "sigma"),
    "constant": (),
    "linear": ("slope",),
    "constant_coeff": ("drift", "sigma"),
}

KNOWN_KEYS = set(DEFAULTS) | {
    "num_steps", "scheme", "schemes", "target", "eps", "ladder", "ladder_log2",
    "path_csv", "theta", "mean", "sigma", "drift", "slope",
}


def load_config(path) -> dict:
    """Read a config file; an empty or missing ``path`` yields the defaults."""
    cfg = dict(DEFAULTS)
    if path is None:
        return cfg
    try:
        text = FsPath(path).read_text()
    except OSError:
        raise
    try:
        data = yaml.safe_load(text) if not str(path).endswith(".json") else json.loads(text)
    except (yaml.YAMLError, json.JSONDecodeError) as exc:
        raise ConfigurationError(f"cannot parse {path}: {exc}") from exc
    if data is None:
        data = {}
    if not isinstance(data, dict):
        raise ConfigurationError(f"{path}: top level must be a mapping")
    unknown = set(data) - KNOWN_KEYS
    if unknown:
        raise ConfigurationError(f"{path}: unknown keys {sorted(unknown)}")
    cfg.update(data)
    return cfg


def parse_override(item: str):
    if "=" not in item:
        raise ConfigurationError(f"override {item!r} is not key=value")
    key, raw = item.split("=", 1)
    key = key.strip()
    if key not in KNOWN_KEYS:
        raise ConfigurationError(f"unknown override key {key!r}")
    try:
        value = yaml.safe_load(raw)
    except yaml.YAMLError as exc:
        raise ConfigurationError(f"cannot parse override {item!r}") from exc
    return key, value


def apply_overrides(cfg: dict, overrides) -> dict:
    out = dict(cfg)
    for item in overrides or ():
        key, value = parse_override(item) if isinstance(item, str) else item
        out[key] = value
    return out


def _num(cfg, key, kind=float):
    try:
        return kind(cfg[key])
    except (TypeError, ValueError, KeyError):
        raise ConfigurationError(f"config key {key!r} must be {kind.__name__}") from None


def grid_from(cfg) -> GridSpec:
    if cfg.get("num_steps") is not None:
        n = _num(cfg, "num_steps", int)
    else:
        n = 2 ** _num(cfg, "grid_log2", int)
    return GridSpec(_num(cfg, "horizon"), n, _num(cfg, "origin"))


def process_from(cfg):
    name = str(cfg.get("process", "brownian")).lower()
    if name not in _PROCESS_KEYS:
        raise ConfigurationError(f"unknown process {name!r}")
    params = {k: cfg[k] for k in _PROCESS_KEYS[name] if cfg.get(k) is not None}
    return make_process(name, **params)


def ladder_from(cfg, grid: GridSpec) -> EpsilonLadder:
    if cfg.get("ladder") is not None:
        values = cfg["ladder"]
        if isinstance(values, str):
            values = [v for v in values.split(",") if v.strip()]
        try:
            values = [float(v) for v in values]
        except (TypeError, ValueError):
            raise ConfigurationError("ladder must be a list of numbers") from None
    elif cfg.get("ladder_log2") is not None:
        lo, hi = (int(v) for v in cfg["ladder_log2"])
        values = [2.0**-k for k in range(lo, hi + 1)]
    else:
        raise ConfigurationError("config needs 'ladder' or 'ladder_log2'")
    return EpsilonLadder.from_values(values, grid)


def experiment_from(cfg) -> ExperimentSpec:
    if cfg.get("scheme") is None:
        raise ConfigurationError("config needs 'scheme'")
    grid = grid_from(cfg)
    window = cfg.get("rate_window")
    return ExperimentSpec(
        scheme=cfg["scheme"],
        grid=grid,
        ladder=ladder_from(cfg, grid),
        num_paths=_num(cfg, "paths", int),
        master_seed=_num(cfg, "seed", int),
        level=_num(cfg, "level"),
        process=process_from(cfg),
        target=cfg.get("target"),
        oracle_refine=_num(cfg, "oracle_refine", int),
        holder_delta=_num(cfg, "holder_delta"),
        holder_paths=_num(cfg, "holder_paths", int),
        rate_window=None if window is None else tuple(float(v) for v in window),
        terminal_max=None if cfg.get("terminal_max") is None else _num(cfg, "terminal_max"),
        chunk_size=_num(cfg, "chunk_size", int),
        n_jobs=_num(cfg, "n_jobs", int),
        keep_per_path=bool(cfg.get("keep_per_path", False)),
    )
