"""Run configuration: flat TOML with dotted keys, e.g. ``model.beta = 1.5``.

A ``run.json`` written by a previous experiment is accepted as well; its
``config`` entry holds the same flat mapping.
"""
from __future__ import annotations

import json
import math
import re
from dataclasses import dataclass, field
from pathlib import Path

try:  # Python >= 3.11
    import tomllib
except ModuleNotFoundError:  # pragma: no cover
    import tomli as tomllib

from .errors import AlleeFrontsError, ConfigError
from .model import InitialProfile, NonlinearityModel, validate_model
from .solver import SolverConfig

KINDS = ("simulate", "certify", "sweep")
SUITES = ("traveling", "bump", "global", "ordering")

DEFAULT_PHASE_GRID = (
    (0.75, 1.6), (0.75, 1.8), (0.75, 2.6), (0.75, 3.5),
    (1.0, 1.45), (1.0, 1.6), (1.0, 2.3), (1.0, 3.0),
    (1.5, 1.3), (1.5, 1.4), (1.5, 2.0), (1.5, 2.5),
    (2.0, 1.22), (2.0, 1.28), (2.0, 1.8), (2.0, 2.5),
)

_TOP = {
    "kind": str, "levels": list, "epsilon": float, "output": str,
}
_CERTIFY = {
    "suites": list, "c": float, "allowance": float, "negative_control": bool,
}
_SWEEP = {
    "grid": list, "jobs": int, "level": float, "min_distance": float, "min_agreement": float,
}


@dataclass
class RunConfig:
    model: NonlinearityModel
    profile: InitialProfile
    solver: SolverConfig
    levels: tuple[float, ...] = (0.5,)
    epsilon: float = 0.2
    output: str = "out"
    kind: str = "simulate"
    certify: dict = field(default_factory=dict)
    sweep: dict = field(default_factory=dict)
    flat: dict = field(default_factory=dict)

    def echo(self) -> dict:
        """Flat key/value echo, enough to rebuild this configuration."""
        return dict(self.flat)


def _flatten(tree: dict, prefix: str = "") -> dict:
    out = {}
    for k, v in tree.items():
        key = f"{prefix}{k}"
        if isinstance(v, dict):
            out.update(_flatten(v, key + "."))
        else:
            out[key] = v
    return out


def _line_of(text: str | None, key: str) -> str:
    if not text:
        return ""
    leaf = key.split(".")[-1]
    pat = re.compile(rf"^\s*{re.escape(key)}\s*=|^\s*{re.escape(leaf)}\s*=")
    for n, line in enumerate(text.splitlines(), 1):
        if pat.search(line):
            return f" (line {n})"
    return ""


def parse_text(text: str, source: str = "<config>") -> dict:
    try:
        tree = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        msg = str(exc)
        m = re.search(r"at line (\d+)", msg)
        line = int(m.group(1)) if m else max(1, len(text.splitlines()))
        raise ConfigError(f"{source}: line {line}: {msg}") from exc
    return _flatten(tree)


def load_flat(path: str | Path) -> tuple[dict, str | None]:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    if path.suffix == ".json":
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: line {exc.lineno}: {exc.msg}") from exc
        return dict(data.get("config", data)), None
    return parse_text(text, str(path)), text


def _coerce(key: str, value, kind, text):
    where = _line_of(text, key)
    if kind is float:
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(f"{key}{where}: expected a number, got {value!r}")
        value = float(value)
        if not math.isfinite(value):
            raise ConfigError(f"{key}{where}: must be finite")
        return value
    if kind is int:
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigError(f"{key}{where}: expected an integer, got {value!r}")
        return value
    if not isinstance(value, kind):
        raise ConfigError(f"{key}{where}: expected {kind.__name__}, got {value!r}")
    return value


_MODEL_TYPES = {"kind": str, "r": float, "beta": float, "delta": float, "s0": float,
                "r_bar": float, "table_s": list, "table_f": list}
_PROFILE_TYPES = {"tail_kind": str, "C": float, "C_bar": float, "alpha": float, "x0": float,
                  "eta": float, "a": float, "b": float, "table_x": list, "table_u": list}
_SOLVER_TYPES = {"dx": float, "cfl": float, "t_end": float, "snapshot_dt": float, "keep_every": int,
                 "margin": float, "left_pad": float, "trigger_frac": float, "trigger_ratio": float,
                 "trigger_floor": float, "growth": float, "max_nodes": int, "left_bc": str,
                 "right_bc": str, "invasion_level": float}


def build_config(flat: dict, text: str | None = None) -> RunConfig:
    """Validate a flat mapping and build the typed configuration."""
    groups = {"model": {}, "profile": {}, "solver": {}, "certify": {}, "sweep": {}}
    top = {}
    tables = {"model": _MODEL_TYPES, "profile": _PROFILE_TYPES, "solver": _SOLVER_TYPES,
              "certify": _CERTIFY, "sweep": _SWEEP}
    for key, value in flat.items():
        head, _, rest = key.partition(".")
        if not rest:
            if key not in _TOP:
                raise ConfigError(f"unknown key {key!r}{_line_of(text, key)}")
            top[key] = _coerce(key, value, _TOP[key], text)
            continue
        if head not in tables or rest not in tables[head]:
            raise ConfigError(f"unknown key {key!r}{_line_of(text, key)}")
        groups[head][rest] = _coerce(key, value, tables[head][rest], text)

    beta = groups["model"].get("beta")
    if beta is not None and not beta > 1:
        raise ConfigError(f"model.beta{_line_of(text, 'model.beta')}: beta must exceed 1")

    def build(cls, name):
        kwargs = dict(groups[name])
        for k, v in list(kwargs.items()):
            if isinstance(v, list):
                kwargs[k] = tuple(v)
        try:
            return cls(**kwargs)
        except AlleeFrontsError as exc:
            raise ConfigError(f"[{name}] {exc}") from exc

    model = build(NonlinearityModel, "model")
    profile = build(InitialProfile, "profile")
    solver = build(SolverConfig, "solver")

    report = validate_model(model)
    if not report.valid and top.get("kind", "simulate") != "sweep":
        raise ConfigError("model: " + "; ".join(report.reasons))

    kind = top.get("kind", "simulate")
    if kind not in KINDS:
        raise ConfigError(f"kind{_line_of(text, 'kind')}: expected one of {KINDS}, got {kind!r}")
    levels = tuple(float(v) for v in top.get("levels", [0.5]))
    for lam in levels:
        if not 0 < lam < 1:
            raise ConfigError(f"levels{_line_of(text, 'levels')}: every level must lie in (0, 1)")
    epsilon = top.get("epsilon", 0.2)
    if not epsilon > 0:
        raise ConfigError(f"epsilon{_line_of(text, 'epsilon')}: must be positive")

    # suites=None picks the ones that apply to the configured regime
    certify = {"suites": None, "c": None, "allowance": 0.0, "negative_control": True}
    certify.update(groups["certify"])
    for s in certify["suites"] or ():
        if s not in SUITES:
            raise ConfigError(f"certify.suites: unknown suite {s!r}; expected a subset of {SUITES}")
    sweep = {"grid": [list(p) for p in DEFAULT_PHASE_GRID], "jobs": 1, "level": 0.5,
             "min_distance": 0.2, "min_agreement": 0.9}
    sweep.update(groups["sweep"])
    for cell in sweep["grid"]:
        if not (isinstance(cell, list) and len(cell) == 2):
            raise ConfigError("sweep.grid: expected a list of [alpha, beta] pairs")

    return RunConfig(
        model=model, profile=profile, solver=solver, levels=levels, epsilon=epsilon,
        output=top.get("output", "out"), kind=kind, certify=certify, sweep=sweep, flat=dict(flat),
    )


def load_config(path: str | Path) -> RunConfig:
    flat, text = load_flat(path)
    return build_config(flat, text)
