"""Experiment configuration: YAML file plus command-line overrides.

Schema (all keys optional; defaults are the reference settings)::

    array:
      num_elements: 10
      element_spacing: 0.5
    beam:
      targets: [-40, 0, 40]
      beam_width: 10
      grid: {lo: -90, hi: 90, resolution: 0.1}
      cross_weight: 1.0
    design:
      total_power: 1.0
      noise_power: 0.01
      gamma_db: [4, 8, 12, 16, 20, 24]
      users: [2, 4, 6]
    method: both            # radar_only | sdr | zf | both
    trials: 50
    seed: 2024
    block_length: 1024
    sim_blocks: 20
    radar_noise: 1.0
    record_timing: false    # wall-clock column left empty unless true
    output_dir: out

Overrides use dotted keys, e.g. ``design.users=[2]`` or ``trials=10``; the
value is parsed as YAML.
"""

from __future__ import annotations

import copy
from dataclasses import dataclass, field
from pathlib import Path

import yaml

from .array import ArrayGeometry, BeamSpec, DomainError, angle_grid

METHODS = ("radar_only", "sdr", "zf", "both")


class ConfigError(ValueError):
    pass


DEFAULTS: dict = {
    "array": {"num_elements": 10, "element_spacing": 0.5},
    "beam": {
        "targets": [-40.0, 0.0, 40.0],
        "beam_width": 10.0,
        "grid": {"lo": -90.0, "hi": 90.0, "resolution": 0.1},
        "cross_weight": 1.0,
    },
    "design": {
        "total_power": 1.0,
        "noise_power": 0.01,
        "gamma_db": [4.0, 8.0, 12.0, 16.0, 20.0, 24.0],
        "users": [2, 4, 6],
    },
    "method": "both",
    "trials": 50,
    "seed": 2024,
    "block_length": 1024,
    "sim_blocks": 20,
    "radar_noise": 1.0,
    "record_timing": False,
    "output_dir": "out",
}


def _merge(base: dict, upd: dict, path: str = "") -> dict:
    out = copy.deepcopy(base)
    for k, v in upd.items():
        key = f"{path}{k}"
        if k not in base:
            raise ConfigError(f"unknown config key '{key}'")
        if isinstance(base[k], dict):
            if not isinstance(v, dict):
                raise ConfigError(f"'{key}' must be a mapping")
            out[k] = _merge(base[k], v, key + ".")
        else:
            out[k] = v
    return out


def apply_override(raw: dict, assignment: str) -> dict:
    if "=" not in assignment:
        raise ConfigError(f"override '{assignment}' is not of the form key=value")
    key, val = assignment.split("=", 1)
    try:
        value = yaml.safe_load(val)
    except yaml.YAMLError as exc:
        raise ConfigError(f"cannot parse override value {val!r}: {exc}") from None
    upd: dict = {}
    cur = upd
    parts = key.strip().split(".")
    for p in parts[:-1]:
        cur = cur.setdefault(p, {})
    cur[parts[-1]] = value
    return _merge(raw, upd)


@dataclass(frozen=True)
class ExperimentConfig:
    geom: ArrayGeometry
    spec: BeamSpec
    total_power: float
    noise_power: float
    gamma_db: tuple[float, ...]
    users: tuple[int, ...]
    method: str
    trials: int
    seed: int
    block_length: int
    sim_blocks: int
    radar_noise: float
    record_timing: bool
    output_dir: Path
    raw: dict = field(repr=False, compare=False, default_factory=dict)

    @property
    def methods(self) -> tuple[str, ...]:
        return ("sdr", "zf") if self.method == "both" else (self.method,)


def _num_list(v, name, cast=float) -> tuple:
    items = v if isinstance(v, (list, tuple)) else [v]
    try:
        return tuple(cast(x) for x in items)
    except (TypeError, ValueError):
        raise ConfigError(f"'{name}' must be a number or a list of numbers") from None


def from_dict(raw: dict) -> ExperimentConfig:
    cfg = _merge(DEFAULTS, raw or {})
    try:
        a, b, d = cfg["array"], cfg["beam"], cfg["design"]
        geom = ArrayGeometry(int(a["num_elements"]), float(a["element_spacing"]))
        g = b["grid"]
        grid = angle_grid(float(g["lo"]), float(g["hi"]), float(g["resolution"]))
        spec = BeamSpec(tuple(_num_list(b["targets"], "beam.targets")), float(b["beam_width"]), grid,
                        float(b["cross_weight"]))
        gamma_db = _num_list(d["gamma_db"], "design.gamma_db")
        users = _num_list(d["users"], "design.users", int)
        method = str(cfg["method"])
        trials = int(cfg["trials"])
        total_power, noise_power = float(d["total_power"]), float(d["noise_power"])
        block_length, sim_blocks = int(cfg["block_length"]), int(cfg["sim_blocks"])
        seed, radar_noise = int(cfg["seed"]), float(cfg["radar_noise"])
    except (DomainError, TypeError, ValueError, KeyError) as exc:
        raise ConfigError(str(exc)) from None
    if method not in METHODS:
        raise ConfigError(f"method must be one of {METHODS}, got {method!r}")
    if not gamma_db:
        raise ConfigError("design.gamma_db must not be empty")
    if not users or any(k < 1 for k in users):
        raise ConfigError("design.users must list positive user counts")
    if any(k >= geom.M for k in users):
        raise ConfigError(f"every user count must be below the number of antennas ({geom.M})")
    if trials < 1:
        raise ConfigError("trials must be at least 1")
    if total_power <= 0 or noise_power <= 0 or radar_noise < 0:
        raise ConfigError("powers must be positive")
    if block_length < 1 or sim_blocks < 1:
        raise ConfigError("block_length and sim_blocks must be positive")
    return ExperimentConfig(geom, spec, total_power, noise_power, gamma_db, users, method, trials,
                            seed, block_length, sim_blocks, radar_noise, bool(cfg["record_timing"]),
                            Path(str(cfg["output_dir"])), cfg)


def load_config(path: str | Path | None = None, overrides: list[str] | tuple = ()) -> ExperimentConfig:
    raw: dict = {}
    if path is not None:
        try:
            raw = yaml.safe_load(Path(path).read_text()) or {}
        except (OSError, yaml.YAMLError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from None
        if not isinstance(raw, dict):
            raise ConfigError("config file must hold a mapping")
    raw = _merge(DEFAULTS, raw)
    for ov in overrides:
        raw = apply_override(raw, ov)
    return from_dict(raw)
