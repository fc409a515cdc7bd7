"""Run configuration: schema, loading, command-line overrides and initial data."""

from __future__ import annotations

import copy
import json
import math
from dataclasses import fields
from pathlib import Path

import jsonschema
import numpy as np
import yaml

from . import grid as G
from .errors import ConfigError
from .model import ModelParams
from .peakons import PeakonSystem, amplitude_for_speed, sample_field
from .timestepper import StepControl

MODES = ("simulate", "peakon", "characteristics", "blowup-check", "verify", "sweep")

_NUM = {"type": "number"}
_POS = {"type": "number", "exclusiveMinimum": 0}


def _obj(props: dict, required=()) -> dict:
    return {"type": "object", "properties": props, "required": list(required),
            "additionalProperties": False}


_INITIAL = {
    "oneOf": [
        _obj({"family": {"const": "constant"}, "value": _NUM}, ["family", "value"]),
        _obj({"family": {"const": "sine"}, "mean": _NUM, "amplitude": _NUM,
              "wavenumber": {"type": "integer", "minimum": 1}, "phase": _NUM,
              "form": {"enum": ["u", "m"]}}, ["family"]),
        _obj({"family": {"const": "bump"}, "base": _NUM, "mass": _NUM, "width": _POS,
              "center": _NUM}, ["family", "mass", "width"]),
        _obj({"family": {"const": "peakon"}, "c": _NUM, "a": _NUM, "x0": _NUM,
              "root": {"type": "integer", "minimum": 0}}, ["family"]),
        _obj({"family": {"const": "multipeakon"},
              "peaks": {"type": "array", "minItems": 1,
                        "items": _obj({"p": _NUM, "q": _NUM}, ["p", "q"])}},
             ["family", "peaks"]),
        _obj({"family": {"const": "samples"}, "path": {"type": "string"},
              "column": {"type": "string"}}, ["family", "path"]),
    ]
}

SCHEMA = _obj({
    "mode": {"enum": list(MODES)},
    "params": _obj({"k1": _NUM, "k2": _NUM, "gamma": _NUM}),
    "grid": _obj({"n": {"type": "integer", "minimum": 8, "multipleOf": 2}}),
    "initial": _INITIAL,
    "t_end": _POS,
    "control": _obj({
        "dt_init": _POS, "abs_tol": _POS, "rel_tol": _POS, "dt_min": _POS,
        "blowup_gamma_threshold": _POS, "blowup_m_threshold": _POS,
        "sample_stride": {"type": "integer", "minimum": 1}, "dt_max": _POS,
    }),
    "output": _obj({"dir": {"type": "string"}, "plot_script": {"type": "boolean"},
                    "snapshot_every": {"type": "integer", "minimum": 1}}),
    "seeds": {"type": "array", "items": _NUM},
    "peakon": _obj({"variant": {"enum": ["reconciled", "eq44", "printed"]},
                    "samples": {"type": "integer", "minimum": 2}}),
    "detector": _obj({"gamma_threshold": _POS, "split_threshold": _POS, "m_budget": _POS}),
    "sweep": _obj({"mode": {"enum": ["simulate", "peakon", "characteristics", "blowup-check"]},
                   "axes": {"type": "object",
                            "additionalProperties": {"type": "array", "minItems": 1}}},
                  ["axes"]),
    "verify": _obj({"tolerances": {"type": "object", "additionalProperties": _NUM},
                    "criteria": {"type": "array",
                                 "items": {"type": "integer", "minimum": 1, "maximum": 10}}}),
})

DEFAULTS = {
    "params": {"k1": 1.0, "k2": 1.0, "gamma": 0.0},
    "grid": {"n": 256},
    "t_end": 1.0,
    "control": {},
    "output": {"dir": "out", "plot_script": True, "snapshot_every": 10},
    "seeds": [],
    "peakon": {"variant": "reconciled", "samples": 101},
    "detector": {"gamma_threshold": 1e3, "split_threshold": 1e3, "m_budget": 1e8},
    "verify": {"tolerances": {}},
}


def _merge(base: dict, extra: dict) -> dict:
    out = copy.deepcopy(base)
    for k, v in extra.items():
        if isinstance(v, dict) and isinstance(out.get(k), dict):
            out[k] = _merge(out[k], v)
        else:
            out[k] = copy.deepcopy(v)
    return out


def validate(raw: dict) -> None:
    try:
        jsonschema.validate(raw, SCHEMA)
    except jsonschema.ValidationError as exc:
        where = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise ConfigError(f"invalid config at {where}: {exc.message}") from None


def read_file(path: str | Path) -> dict:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    try:
        raw = json.loads(text) if path.suffix == ".json" else yaml.safe_load(text)
    except (json.JSONDecodeError, yaml.YAMLError) as exc:
        raise ConfigError(f"cannot parse config {path}: {exc}") from None
    raw = {} if raw is None else raw
    if not isinstance(raw, dict):
        raise ConfigError("config root must be a mapping")
    return raw


def load(path: str | Path | None = None, mode: str | None = None, out: str | None = None,
         n: int | None = None, t_end: float | None = None) -> dict:
    """Validated config with defaults filled in; explicit arguments win over the file."""
    raw = read_file(path) if path is not None else {}
    validate(raw)
    cfg = _merge(DEFAULTS, raw)
    if path is not None and "initial" in cfg and cfg["initial"].get("family") == "samples":
        sample_path = Path(cfg["initial"]["path"])
        if not sample_path.is_absolute():
            cfg["initial"]["path"] = str(Path(path).parent / sample_path)
    if mode is not None:
        cfg["mode"] = mode
    if out is not None:
        cfg["output"]["dir"] = out
    if n is not None:
        cfg["grid"]["n"] = n
    if t_end is not None:
        cfg["t_end"] = t_end
    validate({k: v for k, v in cfg.items()})
    if "mode" not in cfg:
        raise ConfigError("no mode given on the command line or in the config")
    return cfg


def params_of(cfg: dict) -> ModelParams:
    try:
        return ModelParams(**cfg["params"])
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def control_of(cfg: dict) -> StepControl:
    known = {f.name for f in fields(StepControl)}
    try:
        return StepControl(**{k: v for k, v in cfg["control"].items() if k in known})
    except ValueError as exc:
        raise ConfigError(f"invalid step control: {exc}") from None


def set_dotted(cfg: dict, key: str, value) -> dict:
    out = copy.deepcopy(cfg)
    node = out
    parts = key.split(".")
    for p in parts[:-1]:
        node = node.setdefault(p, {})
        if not isinstance(node, dict):
            raise ConfigError(f"sweep axis {key!r} does not name a nested value")
    node[parts[-1]] = value
    return out


# ---------------------------------------------------------------------------
# initial data


def peakon_system(cfg: dict) -> PeakonSystem:
    init = cfg.get("initial")
    if init is None:
        raise ConfigError("an initial condition is required")
    fam = init["family"]
    if fam == "peakon":
        if ("a" in init) == ("c" in init):
            raise ConfigError("peakon initial data needs exactly one of 'a' or 'c'")
        if "a" in init:
            a = init["a"]
        else:
            roots = amplitude_for_speed(init["c"], params_of(cfg)).roots
            idx = init.get("root", 0)
            if idx >= len(roots):
                raise ConfigError(f"root index {idx} out of range for roots {roots}")
            a = roots[idx]
        return PeakonSystem([a], [init.get("x0", 0.0)])
    if fam == "multipeakon":
        return PeakonSystem([pk["p"] for pk in init["peaks"]], [pk["q"] for pk in init["peaks"]])
    raise ConfigError(f"peakon mode needs a peakon or multipeakon initial condition, got {fam!r}")


def initial_field(cfg: dict) -> np.ndarray:
    init = cfg.get("initial")
    if init is None:
        raise ConfigError("an initial condition is required")
    fam = init["family"]
    if fam == "samples":
        try:
            u = _read_samples(init["path"], init.get("column"))
        except OSError as exc:
            raise ConfigError(f"cannot read samples: {exc}") from None
        try:
            return G.check_field(u)
        except ValueError as exc:
            raise ConfigError(f"bad samples file: {exc}") from None
    n = cfg["grid"]["n"]
    x = G.PeriodicGrid(n).nodes
    if fam == "constant":
        return np.full(n, float(init["value"]))
    if fam == "sine":
        k = init.get("wavenumber", 1)
        prof = init.get("mean", 0.0) + init.get("amplitude", 1.0) * np.sin(
            2 * math.pi * k * x + init.get("phase", 0.0))
        return G.apply_Ainv(prof) if init.get("form", "u") == "m" else prof
    if fam == "bump":
        return bump_field(n, init.get("base", 0.0), init["mass"], init["width"], init.get("center", 0.5))
    return sample_field(peakon_system(cfg), n)


def bump_field(n: int, base: float, mass: float, width: float, center: float = 0.5) -> np.ndarray:
    """u with momentum base + mass * (Gaussian of the given width), wrapped onto the circle."""
    x = G.PeriodicGrid(n).nodes
    d = (x - center + 0.5) % 1.0 - 0.5
    m0 = base + mass * np.exp(-d * d / (2 * width * width)) / (math.sqrt(2 * math.pi) * width)
    return G.apply_Ainv(m0)


def _read_samples(path: str, column: str | None) -> np.ndarray:
    if column is None:
        return np.loadtxt(path, delimiter=",", ndmin=1, comments="#")
    data = np.genfromtxt(path, delimiter=",", names=True)
    if column not in (data.dtype.names or ()):
        raise ConfigError(f"column {column!r} not found in {path}")
    return np.asarray(data[column], dtype=float)
