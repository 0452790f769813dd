"""Run configuration: JSON file + dotted ``--set`` overrides, validated up front."""
from __future__ import annotations

import copy
import json
import math
from pathlib import Path

import jsonschema

from .reference import PRESETS


class ConfigError(ValueError):
    pass


DEFAULTS = {
    "basis": {"kind": "hermite", "N": 8, "a": 1.0, "w": 1.0},
    "potential": {"kind": "harmonic", "depth": -1.0, "half_width": 1.0, "samples": None},
    "grids": {"x_min": -12.0, "x_max": 12.0, "n": 1024, "gamma_max": 12.0, "m": 1024},
    "evolution": {"preset": "paper-literal", "alpha": None, "beta": None,
                  "t": 0.1, "dt": 1e-3, "times": None, "solver": "crank_nicolson"},
    "initial": {"kind": "hermite", "n": 0, "x0": 0.0, "k0": 0.0},
    "kernel": {"eps": 1e-6, "growth_cap": 50.0, "literal_eq4": False},
    "quadrature": {"kind": "trapezoid", "order": 0},
    "harness": {"trials": 4, "fd_dt": 1e-4, "stability_extra": 4, "eq1_probe": 2.0},
    "seeds": {"trials": 0},
    "output": "out",
    "compare": {"a": None, "b": None},
}

_num = {"type": "number"}
_pos = {"type": "number", "exclusiveMinimum": 0}
_complex = {"type": ["array", "null"], "items": _num, "minItems": 2, "maxItems": 2}


def _obj(props, required=()):
    return {"type": "object", "properties": props, "additionalProperties": False,
            "required": list(required)}


SCHEMA = _obj({
    "basis": _obj({"kind": {"enum": ["hermite", "gaussian-frame"]},
                   "N": {"type": "integer", "minimum": 1, "maximum": 64},
                   "a": _pos, "w": _pos}),
    "potential": _obj({"kind": {"enum": ["zero", "harmonic", "finite-well", "tabulated"]},
                       "depth": _num, "half_width": _pos,
                       "samples": {"type": ["array", "null"], "items": _num}}),
    "grids": _obj({"x_min": _num, "x_max": _num,
                   "n": {"type": "integer", "minimum": 8},
                   "gamma_max": _pos, "m": {"type": "integer", "minimum": 8}}),
    "evolution": _obj({
        "preset": {"oneOf": [{"enum": sorted(PRESETS)},
                             {"type": "array", "minItems": 1,
                              "items": {"enum": sorted(PRESETS)}}]},
        "alpha": _complex, "beta": _complex,
        "t": {"type": "number", "minimum": 0}, "dt": _pos,
        "times": {"type": ["array", "null"], "items": {"type": "number", "minimum": 0}},
        "solver": {"enum": ["crank_nicolson", "split_step"]}}),
    "initial": _obj({"kind": {"enum": ["hermite", "gaussian"]},
                     "n": {"type": "integer", "minimum": 0, "maximum": 64},
                     "x0": _num, "k0": _num}),
    "kernel": _obj({"eps": _pos, "growth_cap": {"type": ["number", "null"], "exclusiveMinimum": 0},
                    "literal_eq4": {"type": "boolean"}}),
    "quadrature": _obj({"kind": {"enum": ["trapezoid", "gauss-hermite"]},
                        "order": {"type": "integer", "minimum": 0}}),
    "harness": _obj({"trials": {"type": "integer", "minimum": 1},
                     "fd_dt": _pos, "stability_extra": {"type": "integer", "minimum": 1},
                     "eq1_probe": _pos}),
    "seeds": _obj({"trials": {"type": "integer", "minimum": 0}}),
    "output": {"type": "string", "minLength": 1},
    "compare": _obj({"a": {"type": ["string", "null"]}, "b": {"type": ["string", "null"]}}),
})


def _merge(base: dict, over: dict) -> dict:
    out = copy.deepcopy(base)
    for k, v in over.items():
        if isinstance(v, dict) and isinstance(out.get(k), dict):
            out[k] = _merge(out[k], v)
        else:
            out[k] = v
    return out


def parse_override(item: str) -> tuple[list[str], object]:
    if "=" not in item:
        raise ConfigError(f"--set expects key=value, got {item!r}")
    key, raw = item.split("=", 1)
    try:
        value = json.loads(raw)
    except json.JSONDecodeError:
        value = raw
    return key.strip().split("."), value


def apply_overrides(cfg: dict, overrides) -> dict:
    cfg = copy.deepcopy(cfg)
    for item in overrides or ():
        path, value = parse_override(item)
        node = cfg
        for part in path[:-1]:
            if not isinstance(node.get(part), dict):
                raise ConfigError(f"--set {item!r}: {part!r} is not a config section")
            node = node[part]
        node[path[-1]] = value
    return cfg


def load_config(path, overrides=()) -> dict:
    p = Path(path)
    if not p.is_file():
        raise ConfigError(f"config file not found: {path}")
    try:
        user = json.loads(p.read_text(encoding="utf-8"))
    except json.JSONDecodeError as err:
        raise ConfigError(f"{path}:{err.lineno}:{err.colno}: invalid JSON: {err.msg}") from None
    if not isinstance(user, dict):
        raise ConfigError(f"{path}: top level must be a JSON object")
    cfg = apply_overrides(_merge(DEFAULTS, user), overrides)
    validate(cfg)
    return cfg


def validate(cfg: dict):
    try:
        jsonschema.validate(cfg, SCHEMA)
    except jsonschema.ValidationError as err:
        where = ".".join(str(p) for p in err.absolute_path) or "<root>"
        raise ConfigError(f"config field {where}: {err.message}") from None
    g = cfg["grids"]
    if not g["x_min"] < g["x_max"]:
        raise ConfigError("config field grids.x_min: must be < grids.x_max")
    pot = cfg["potential"]
    if pot["kind"] == "finite-well" and not pot["depth"] < 0:
        raise ConfigError("config field potential.depth: finite-well depth must be < 0")
    if pot["kind"] == "tabulated" and (pot["samples"] is None or len(pot["samples"]) != g["n"]):
        raise ConfigError("config field potential.samples: need exactly grids.n samples")
    ev = cfg["evolution"]
    if (ev["alpha"] is None) != (ev["beta"] is None):
        raise ConfigError("config field evolution.alpha: alpha and beta must be given together")
    if cfg["quadrature"]["kind"] == "gauss-hermite" and cfg["quadrature"]["order"] < 2:
        raise ConfigError("config field quadrature.order: gauss-hermite order must be >= 2")


def growth_cap(cfg: dict) -> float:
    cap = cfg["kernel"]["growth_cap"]
    return math.inf if cap is None else float(cap)
