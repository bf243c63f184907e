"""Scenario files: YAML with ``cell``, ``simulation`` and ``output`` sections.

Units are explicit in every key name. Decibel quantities are converted to
linear values here and nowhere else.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import yaml

from . import cell
from .cell import CellParams

# Thermal noise that puts the SIC power at 24 dBm for 8 users over a 50 m
# cell at 5 bits/s/Hz with K = 2.66e-4, eta = 3.57 (see planner.calibrate_noise).
DEFAULT_NOISE_DBM = -92.32255929858928

DEFAULTS: dict[str, dict[str, Any]] = {
    "cell": {
        "radius_m": 50.0,
        "min_distance_m": 0.0,
        "pathloss_exponent": 3.57,
        "pathloss_constant": 2.66e-4,
        "noise_dbm": DEFAULT_NOISE_DBM,
        "users_per_cell": 8.0,
        "se_target": 5.0,
    },
    "simulation": {"n_users": 8, "seed": 1, "placement": "rings"},
    "output": {"format": None, "path": None},
}

_CELL_KEYS = {
    "radius_m", "min_distance_m", "pathloss_exponent", "pathloss_constant", "noise_dbm",
    "users_per_cell", "density_per_m2", "sinr_target_db", "se_target",
}
_SIM_KEYS = {"n_users", "seed", "placement"}
_OUT_KEYS = {"format", "path"}


class ConfigError(ValueError):
    """Invalid scenario; ``problems`` lists one message per offending field."""

    def __init__(self, problems: list[str]):
        self.problems = problems
        super().__init__("invalid configuration:\n  " + "\n  ".join(problems))


@dataclass
class ScenarioConfig:
    radius_m: float
    min_distance_m: float
    pathloss_exponent: float
    pathloss_constant: float
    noise_dbm: float
    users_per_cell: float | None = None
    density_per_m2: float | None = None
    sinr_target_db: float | None = None
    se_target: float | None = None
    n_users: int = 8
    seed: int = 1
    placement: str = "rings"
    output_format: str | None = None
    output_path: str | None = None
    source: str = field(default="<defaults>", compare=False)

    @property
    def density(self) -> float:
        if self.density_per_m2 is not None:
            return self.density_per_m2
        return cell.density_from_users_per_cell(self.users_per_cell, self.radius_m, self.min_distance_m)

    @property
    def gamma_star(self) -> float:
        if self.sinr_target_db is not None:
            return 10.0 ** (self.sinr_target_db / 10.0)
        return cell.sinr_for_se(self.se_target)

    @property
    def noise_watts(self) -> float:
        return cell.dbm_to_watts(self.noise_dbm)

    def to_params(self) -> CellParams:
        return CellParams(
            R_c=self.radius_m,
            R_0=self.min_distance_m,
            eta=self.pathloss_exponent,
            K=self.pathloss_constant,
            N_th=self.noise_watts,
            rho=self.density,
            gamma_star=self.gamma_star,
        )


def _number(section: dict, key: str, problems: list[str], where: str) -> float | None:
    value = section.get(key)
    if value is None:
        return None
    if isinstance(value, str):
        # PyYAML reads exponent forms without a dot, such as 1e-4, as strings
        try:
            value = float(value)
        except ValueError:
            pass
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        problems.append(f"{where}.{key}: expected a number, got {value!r}")
        return None
    if not math.isfinite(value):
        problems.append(f"{where}.{key}: must be finite, got {value!r}")
        return None
    return float(value)


def merge(base: dict, override: dict) -> dict:
    out = {k: dict(v) for k, v in base.items()}
    for section, values in override.items():
        if isinstance(values, dict) and isinstance(out.get(section), dict):
            out[section].update(values)
        else:
            out[section] = values
    return out


def from_dict(raw: dict, source: str = "<dict>") -> ScenarioConfig:
    """Validate a nested mapping (defaults already merged) into a config."""
    problems: list[str] = []
    if not isinstance(raw, dict):
        raise ConfigError([f"{source}: top level must be a mapping"])
    for section in raw:
        if section not in DEFAULTS:
            problems.append(f"{section}: unknown section")
    c = raw.get("cell") or {}
    s = raw.get("simulation") or {}
    o = raw.get("output") or {}
    for name, sect, keys in (("cell", c, _CELL_KEYS), ("simulation", s, _SIM_KEYS), ("output", o, _OUT_KEYS)):
        if not isinstance(sect, dict):
            problems.append(f"{name}: must be a mapping")
            continue
        for key in sect:
            if key not in keys:
                problems.append(f"{name}.{key}: unknown field")
    if problems:
        raise ConfigError(problems)

    vals = {k: _number(c, k, problems, "cell") for k in _CELL_KEYS}
    radius, r0 = vals["radius_m"], vals["min_distance_m"]
    if radius is None:
        problems.append("cell.radius_m: required")
    elif radius <= 0:
        problems.append(f"cell.radius_m: must be > 0 m, got {radius}")
    if r0 is None:
        r0 = 0.0
    if r0 < 0:
        problems.append(f"cell.min_distance_m: must be >= 0 m, got {r0}")
    elif radius is not None and r0 >= radius:
        problems.append(f"cell.min_distance_m: must be < radius_m ({radius}), got {r0}")
    eta = vals["pathloss_exponent"]
    if eta is None or eta < 2:
        problems.append(f"cell.pathloss_exponent: must be >= 2, got {eta}")
    k = vals["pathloss_constant"]
    if k is None or k <= 0:
        problems.append(f"cell.pathloss_constant: must be > 0, got {k}")
    if vals["noise_dbm"] is None:
        problems.append("cell.noise_dbm: required")

    upc, dens = vals["users_per_cell"], vals["density_per_m2"]
    if (upc is None) == (dens is None):
        problems.append("cell: set exactly one of users_per_cell / density_per_m2")
    elif upc is not None and upc < 0:
        problems.append(f"cell.users_per_cell: must be >= 0, got {upc}")
    elif dens is not None and dens < 0:
        problems.append(f"cell.density_per_m2: must be >= 0 users/m^2, got {dens}")

    sinr_db, se = vals["sinr_target_db"], vals["se_target"]
    if (sinr_db is None) == (se is None):
        problems.append("cell: set exactly one of sinr_target_db / se_target")
    elif se is not None and se <= 0:
        problems.append(f"cell.se_target: must be > 0 bits/s/Hz, got {se}")

    n_users = s.get("n_users", 8)
    if isinstance(n_users, bool) or not isinstance(n_users, int) or n_users < 1:
        problems.append(f"simulation.n_users: must be an integer >= 1, got {n_users!r}")
    seed = s.get("seed", 1)
    if isinstance(seed, bool) or not isinstance(seed, int) or seed < 0:
        problems.append(f"simulation.seed: must be a non-negative integer, got {seed!r}")
    placement = s.get("placement", "rings")
    if placement not in ("uniform", "rings"):
        problems.append(f"simulation.placement: must be 'uniform' or 'rings', got {placement!r}")
    fmt = o.get("format")
    if fmt not in (None, "csv", "table"):
        problems.append(f"output.format: must be 'csv' or 'table', got {fmt!r}")

    if problems:
        raise ConfigError(problems)
    return ScenarioConfig(
        radius_m=radius,
        min_distance_m=r0,
        pathloss_exponent=eta,
        pathloss_constant=k,
        noise_dbm=vals["noise_dbm"],
        users_per_cell=upc,
        density_per_m2=dens,
        sinr_target_db=sinr_db,
        se_target=se,
        n_users=n_users,
        seed=seed,
        placement=placement,
        output_format=fmt,
        output_path=o.get("path"),
        source=source,
    )


def load(path: str | Path | None = None, overrides: dict | None = None) -> ScenarioConfig:
    """Defaults, then the YAML file at ``path``, then ``overrides``.

    Setting one member of an exclusive pair (users_per_cell/density_per_m2,
    sinr_target_db/se_target) in a later layer clears the other.
    """
    raw = merge(DEFAULTS, {})
    source = "<defaults>"
    layers = []
    if path is not None:
        try:
            text = Path(path).read_text()
        except OSError as exc:
            raise ConfigError([f"{path}: {exc.strerror or exc}"]) from exc
        try:
            data = yaml.safe_load(text) or {}
        except yaml.YAMLError as exc:
            raise ConfigError([f"{path}: not valid YAML ({exc})"]) from exc
        if not isinstance(data, dict):
            raise ConfigError([f"{path}: top level must be a mapping"])
        layers.append(data)
        source = str(path)
    if overrides:
        layers.append(overrides)
    for layer in layers:
        cell_layer = layer.get("cell")
        if isinstance(cell_layer, dict):
            for a, b in (("users_per_cell", "density_per_m2"), ("sinr_target_db", "se_target")):
                if a in cell_layer and b not in cell_layer:
                    raw["cell"].pop(b, None)
                elif b in cell_layer and a not in cell_layer:
                    raw["cell"].pop(a, None)
        raw = merge(raw, layer)
    return from_dict(raw, source)
