"""Strict TOML configuration loading for the command-line tools.

Three config flavours exist, distinguished by their sections: simulation
([model]/[sim]/[input]), scan ([model]/[scan]) and navigation
([controller]/[plant]/[task]).  Unknown sections or keys are errors, not
warnings, so a typo cannot silently fall back to a default.
"""

from __future__ import annotations

import math
from importlib import resources
from pathlib import Path

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:  # Python 3.10
    import tomli as tomllib

from .errors import ConfigError
from .model import ModelParams
from .navigation import NavParams, NavScenario, ReferencePath
from .simulate import DetectorConfig

__all__ = [
    "load_config",
    "config_kind",
    "bundled_config_path",
    "bundled_config_names",
    "build_model_params",
    "build_detector",
    "build_input_fn",
    "build_nav_scenario",
    "effective_meta",
]

_NUM = (int, float)

# Per-flavour section schemas: key -> (type tuple, required, default).
_MODEL_KEYS = {
    "tau": (_NUM, True, None),
    "tau_s": (_NUM, True, None),
    "alpha": (_NUM, True, None),
    "beta1": (_NUM, True, None),
    "beta2": (_NUM, True, None),
    "beta3": (_NUM, True, None),
}
_DETECTOR_KEYS = {
    "r_up": (_NUM, False, 0.8),
    "r_down": (_NUM, False, 0.4),
    "steady_frac": (_NUM, False, 0.6),
}
_SIM_SCHEMA = {
    "model": (_MODEL_KEYS, True),
    "sim": (
        {
            "system": (str, True, None),
            "dt": (_NUM, False, None),
            "t_end": (_NUM, True, None),
            "x0": (list, False, None),
            "r0": (_NUM, False, 0.0),
            "xs0": (_NUM, False, 0.0),
        },
        True,
    ),
    "input": (
        {
            "type": (str, True, None),
            "value": ((*_NUM, list), False, None),
            "rate": (_NUM, False, None),
            "t_on": (_NUM, False, 0.0),
            "t_off": (_NUM, False, None),
        },
        True,
    ),
    "detector": (_DETECTOR_KEYS, False),
}
_SCAN_SCHEMA = {
    "model": (_MODEL_KEYS, True),
    "scan": (
        {
            "u_min": (_NUM, True, None),
            "u_max": (_NUM, True, None),
            "tol": (_NUM, False, 1e-3),
            "n_scan": (int, False, 257),
            "t_end": (_NUM, False, 240.0),
            "dt": (_NUM, False, None),
        },
        True,
    ),
    "fi": (
        {
            "n_points": (int, False, 25),
            "t_end": (_NUM, False, 300.0),
            "u_min": (_NUM, False, None),
            "u_max": (_NUM, False, None),
        },
        False,
    ),
    "phase": (
        {
            "u_values": (list, False, None),
            "r_max": (_NUM, False, 1.6),
            "n_grid": (int, False, 401),
            "field_n": (int, False, 25),
            "orbit_t_end": (_NUM, False, 120.0),
        },
        False,
    ),
    "detector": (_DETECTOR_KEYS, False),
}
_NAV_SCHEMA = {
    "controller": (
        {
            "tau": (_NUM, True, None),
            "tau_s": (_NUM, True, None),
            "beta1": (_NUM, True, None),
            "beta2": (_NUM, True, None),
            "beta3": (_NUM, True, None),
        },
        True,
    ),
    "plant": (
        {
            "gamma": (_NUM, True, None),
            "alpha_act": (_NUM, True, None),
            "S": (_NUM, True, None),
        },
        True,
    ),
    "task": (
        {
            "k1": (_NUM, True, None),
            "k2": (_NUM, False, 0.0),
            "eps": (_NUM, True, None),
            "t_end": (_NUM, True, None),
            "dt": (_NUM, True, None),
            "output_dt": (_NUM, True, None),
            "transient": (_NUM, False, 10.0),
            "ref_radius0": (_NUM, False, 20.0),
            "ref_radius_rate": (_NUM, False, 0.04),
            "ref_angle0": (_NUM, False, math.pi / 4.0),
            "ref_angle_rate": (_NUM, False, 0.01),
        },
        True,
    ),
    "obstacles": ({"points": (list, False, [])}, False),
}
_SCHEMAS = {"sim": _SIM_SCHEMA, "scan": _SCAN_SCHEMA, "nav": _NAV_SCHEMA}


def config_kind(doc: dict) -> str:
    if "controller" in doc:
        return "nav"
    if "scan" in doc:
        return "scan"
    if "sim" in doc:
        return "sim"
    raise ConfigError(
        "cannot infer config kind: expected a [sim], [scan] or [controller] section"
    )


def _validate_section(name: str, data: dict, keys: dict) -> dict:
    unknown = set(data) - set(keys)
    if unknown:
        raise ConfigError(f"unknown key(s) in [{name}]: {', '.join(sorted(unknown))}")
    out = {}
    for key, (types, required, default) in keys.items():
        if key in data:
            v = data[key]
            if isinstance(v, bool) or not isinstance(v, types):
                raise ConfigError(
                    f"[{name}].{key} has wrong type {type(v).__name__}"
                )
            out[key] = v
        elif required:
            raise ConfigError(f"[{name}] is missing required key '{key}'")
        else:
            out[key] = default
    return out


def load_config(path) -> dict:
    """Parse and validate a TOML config; returns sections with defaults filled."""
    p = Path(path)
    if not p.is_file():
        raise ConfigError(f"config file not found: {p}")
    try:
        with open(p, "rb") as fh:
            doc = tomllib.load(fh)
    except tomllib.TOMLDecodeError as e:
        raise ConfigError(f"invalid TOML in {p}: {e}") from e

    kind = config_kind(doc)
    schema = _SCHEMAS[kind]
    unknown = set(doc) - set(schema)
    if unknown:
        raise ConfigError(f"unknown section(s): {', '.join(sorted(unknown))}")
    out = {"kind": kind}
    for section, (keys, required) in schema.items():
        if section in doc:
            if not isinstance(doc[section], dict):
                raise ConfigError(f"[{section}] must be a table")
            out[section] = _validate_section(section, doc[section], keys)
        elif required:
            raise ConfigError(f"missing required section [{section}]")
        else:
            out[section] = _validate_section(section, {}, keys)
    return out


def bundled_config_path(name: str) -> Path:
    """Path of a config shipped with the package (name without .toml)."""
    base = resources.files("dirspike") / "configs" / f"{name}.toml"
    path = Path(str(base))
    if not path.is_file():
        raise ConfigError(
            f"no bundled config named '{name}'; available: "
            + ", ".join(bundled_config_names())
        )
    return path


def bundled_config_names() -> list[str]:
    base = Path(str(resources.files("dirspike") / "configs"))
    return sorted(p.stem for p in base.glob("*.toml"))


def build_model_params(cfg: dict) -> ModelParams:
    m = cfg["model"]
    try:
        return ModelParams(
            tau=float(m["tau"]), tau_s=float(m["tau_s"]), alpha=float(m["alpha"]),
            beta1=float(m["beta1"]), beta2=float(m["beta2"]), beta3=float(m["beta3"]),
        )
    except ValueError as e:
        raise ConfigError(f"invalid [model]: {e}") from e


def build_detector(cfg: dict) -> DetectorConfig:
    d = cfg["detector"]
    try:
        return DetectorConfig(
            r_up=float(d["r_up"]), r_down=float(d["r_down"]),
            steady_frac=float(d["steady_frac"]),
        )
    except ValueError as e:
        raise ConfigError(f"invalid [detector]: {e}") from e


def build_input_fn(cfg: dict):
    """Input object for simulate_*: a constant, a step, or the rotating
    sweep u(t) = (1 - cos(rate*t)) * (cos(rate*t), sin(rate*t))."""
    sec = cfg["input"]
    kind = sec["type"]
    system = cfg["sim"]["system"]
    if kind == "constant":
        if sec["value"] is None:
            raise ConfigError("[input] type='constant' requires 'value'")
        if system == "reduced":
            if not isinstance(sec["value"], _NUM):
                raise ConfigError("[input].value must be a number for a reduced run")
            return float(sec["value"])
        if not isinstance(sec["value"], list):
            raise ConfigError("[input].value must be a vector for a full run")
        return np.asarray([float(v) for v in sec["value"]])
    if kind == "step":
        if sec["value"] is None or sec["t_off"] is None:
            raise ConfigError("[input] type='step' requires 'value' and 't_off'")
        t_on, t_off = float(sec["t_on"]), float(sec["t_off"])
        if system == "reduced":
            v = float(sec["value"])
            return lambda t: v if t_on <= t < t_off else 0.0
        v = np.asarray([float(x) for x in sec["value"]])
        zero = np.zeros_like(v)
        return lambda t: v if t_on <= t < t_off else zero
    if kind == "rotating":
        if system != "full":
            raise ConfigError("[input] type='rotating' needs a full 2-D run")
        if sec["rate"] is None:
            raise ConfigError("[input] type='rotating' requires 'rate'")
        w = float(sec["rate"])

        def u(t: float) -> np.ndarray:
            ang = w * t
            mag = 1.0 - math.cos(ang)
            return np.array([mag * math.cos(ang), mag * math.sin(ang)])

        return u
    raise ConfigError(f"unknown [input].type '{kind}'")


def build_nav_scenario(cfg: dict) -> NavScenario:
    c, pl, task = cfg["controller"], cfg["plant"], cfg["task"]
    pts = cfg["obstacles"]["points"]
    obstacles = []
    for i, pt in enumerate(pts):
        if not (isinstance(pt, list) and len(pt) == 2 and all(isinstance(v, _NUM) for v in pt)):
            raise ConfigError(f"[obstacles].points[{i}] must be a pair of numbers")
        obstacles.append((float(pt[0]), float(pt[1])))
    try:
        ctrl = ModelParams(
            tau=float(c["tau"]), tau_s=float(c["tau_s"]), alpha=1.0,
            beta1=float(c["beta1"]), beta2=float(c["beta2"]), beta3=float(c["beta3"]),
        )
        params = NavParams(
            ctrl=ctrl,
            gamma=float(pl["gamma"]), alpha_act=float(pl["alpha_act"]), S=float(pl["S"]),
            k1=float(task["k1"]), k2=float(task["k2"]), eps=float(task["eps"]),
            obstacles=tuple(obstacles),
        )
        path = ReferencePath(
            radius0=float(task["ref_radius0"]),
            radius_rate=float(task["ref_radius_rate"]),
            angle0=float(task["ref_angle0"]),
            angle_rate=float(task["ref_angle_rate"]),
        )
        return NavScenario(
            params=params,
            path=path,
            t_end=float(task["t_end"]),
            dt=float(task["dt"]),
            output_dt=float(task["output_dt"]),
            transient=float(task["transient"]),
        )
    except ValueError as e:
        raise ConfigError(f"invalid navigation config: {e}") from e


def effective_meta(cfg: dict) -> dict:
    """Flatten a validated config to 'section.key' -> value for file headers."""
    out = {}
    for section, data in cfg.items():
        if section == "kind":
            out["kind"] = cfg["kind"]
            continue
        for key, v in data.items():
            if v is None:
                continue
            if isinstance(v, list):
                out[f"{section}.{key}"] = "[" + ";".join(str(x) for x in v) + "]"
            else:
                out[f"{section}.{key}"] = v
    return out
