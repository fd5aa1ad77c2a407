"""Scenario configuration: strict parsing, defaults and validation."""
from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field

import numpy as np
import yaml

from .evolvers import RHS_KINDS, max_stable_dt
from .model import HybridModel
from .phase_grid import METHODS, PhaseGrid

__all__ = ["SCENARIOS", "ConfigError", "ScenarioConfig", "parse_config", "apply_overrides"]

SCENARIOS = ("positivity", "collapse", "oracle-compare", "meanfield-compare", "free-run")
INITIAL_STATES = ("dyad", "spin-up", "superposition")

# padding of the factored positivity run (see evolvers.evolve_dyad)
FACTOR_PAD = 4.0

_SCENARIO_DEFAULTS = {
    "positivity": {"kappa": 1.0, "t_final": 0.5},
    "collapse": {"n_fock": 64, "t_final": 0.0},
    "oracle-compare": {"kappa": 0.3, "t_final": 1.0},
    "meanfield-compare": {"kappa": 1.0, "t_final": 1.0},
    "free-run": {"kappa": 0.3, "t_final": 1.0},
}


class ConfigError(ValueError):
    """Malformed or invalid scenario configuration."""


@dataclass(frozen=True)
class ScenarioConfig:
    scenario: str
    L: float = 8.0
    N: int = 128
    t_final: float = 0.5
    dt: float = 1e-3
    sample_stride: int = 100
    kappa: float = 1.0
    g: float = 5.0
    c_plus_sq: float = 0.3
    h_q: list = field(default_factory=lambda: [[0.0, 0.0], [0.0, 0.0]])
    method: str = "spectral"
    n_fock: int = 40
    rhs: str = "hybrid"
    initial: str = "dyad"
    output_dir: str | None = None
    seed: int | None = None

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)


_FIELDS = {f.name for f in dataclasses.fields(ScenarioConfig)}


def _fail(msg: str):
    raise ConfigError(msg)


def _number(d: dict, key: str, kind=float):
    v = d[key]
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        _fail(f"{key}: expected a number, got {v!r}")
    if kind is int:
        if int(v) != v:
            _fail(f"{key}: expected an integer, got {v!r}")
        return int(v)
    if not np.isfinite(v):
        _fail(f"{key}: must be finite")
    return float(v)


def _validate(cfg: ScenarioConfig) -> ScenarioConfig:
    if cfg.L <= 0:
        _fail(f"L: half width must be positive, got {cfg.L}")
    if cfg.N < 16 or cfg.N % 2:
        _fail(f"N: points per axis must be even and >= 16, got {cfg.N}")
    if cfg.t_final < 0:
        _fail("t_final: must be non-negative")
    if cfg.dt <= 0:
        _fail("dt: must be positive")
    if cfg.sample_stride < 1:
        _fail("sample_stride: must be >= 1")
    if not 0 <= cfg.c_plus_sq <= 1:
        _fail(f"c_plus_sq: must lie in [0, 1], got {cfg.c_plus_sq}")
    if cfg.n_fock < 2:
        _fail("n_fock: must be >= 2")
    if cfg.method not in METHODS:
        _fail(f"method: must be one of {METHODS}, got {cfg.method!r}")
    if cfg.rhs not in RHS_KINDS:
        _fail(f"rhs: must be one of {RHS_KINDS}, got {cfg.rhs!r}")
    if cfg.initial not in INITIAL_STATES:
        _fail(f"initial: must be one of {INITIAL_STATES}, got {cfg.initial!r}")
    h_q = np.asarray(cfg.h_q, dtype=complex) if _is_matrix(cfg.h_q) else None
    if h_q is None or h_q.shape != (2, 2) or not np.allclose(h_q, h_q.conj().T, atol=1e-12):
        _fail("h_q: must be a Hermitian 2x2 matrix given as nested lists")

    grid = PhaseGrid(cfg.L, cfg.N, cfg.method)
    if cfg.scenario == "positivity":
        grid = grid.padded(FACTOR_PAD)
    dt_max = max_stable_dt(grid, HybridModel.spin_oscillator(cfg.kappa, h_q))
    if cfg.scenario != "collapse" and cfg.dt > dt_max:
        _fail(f"dt: {cfg.dt:g} exceeds the RK4 stability bound {dt_max:.4g} for h={grid.h:g}")

    if cfg.scenario == "collapse":
        if cfg.t_final != 0:
            _fail("t_final: the collapse scenario reads out right after the kick; use 0")
        # coherent amplitudes of the kicked branches stay inside the Fock budget
        if cfg.g**2 / 2 > cfg.n_fock / 4:
            _fail(
                f"g: kick {cfg.g:g} displaces the pointer to |z|^2 = {cfg.g**2 / 2:g}, "
                f"beyond the n_fock/4 = {cfg.n_fock / 4:g} budget"
            )
    return cfg


def _is_matrix(v) -> bool:
    return isinstance(v, list) and all(isinstance(r, list) for r in v)


def _collapse_grid(d: dict):
    """Keep the spacing, widen to ``L >= max(12, g + 5)``."""
    h = 2 * d["L"] / d["N"]
    L_min = max(12.0, abs(d["g"]) + 5.0)
    if d["L"] < L_min:
        n_half = int(np.ceil(L_min / h - 1e-9))
        d["L"], d["N"] = n_half * h, 2 * n_half


def config_from_mapping(data) -> ScenarioConfig:
    if not isinstance(data, dict):
        _fail(f"configuration must be a mapping, got {type(data).__name__}")
    unknown = sorted(set(data) - _FIELDS)
    if unknown:
        _fail(f"unknown key(s): {', '.join(map(str, unknown))}")
    if "scenario" not in data:
        _fail("scenario: missing (one of " + ", ".join(SCENARIOS) + ")")
    name = data["scenario"]
    if name not in SCENARIOS:
        _fail(f"scenario: unknown scenario {name!r}; choose from {SCENARIOS}")

    d = {f.name: f.default for f in dataclasses.fields(ScenarioConfig)}
    d["scenario"] = name
    d["h_q"] = [[0.0, 0.0], [0.0, 0.0]]
    d.update(_SCENARIO_DEFAULTS[name])
    d.update(data)
    for key in ("L", "t_final", "dt", "kappa", "g", "c_plus_sq"):
        d[key] = _number(d, key)
    for key in ("N", "sample_stride", "n_fock"):
        d[key] = _number(d, key, int)
    for key in ("method", "rhs", "initial"):
        if not isinstance(d[key], str):
            _fail(f"{key}: expected a string")
    if d["output_dir"] is not None and not isinstance(d["output_dir"], str):
        _fail("output_dir: expected a path string")
    if d["seed"] is not None:
        d["seed"] = _number(d, "seed", int)
    if name == "collapse" and d["L"] > 0 and d["N"] > 0:
        _collapse_grid(d)
    return _validate(ScenarioConfig(**d))


def parse_config(text: str) -> ScenarioConfig:
    """Parse a YAML (or JSON) document into a validated :class:`ScenarioConfig`."""
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        where = f" at line {mark.line + 1}, column {mark.column + 1}" if mark else ""
        raise ConfigError(f"parse error{where}: {getattr(exc, 'problem', exc)}") from exc
    return config_from_mapping({} if data is None else data)


def apply_overrides(data: dict, overrides: list[str]) -> dict:
    """``key=value`` strings, each value parsed as a YAML scalar or flow node."""
    out = dict(data)
    for item in overrides:
        key, sep, raw = item.partition("=")
        if not sep or not key:
            _fail(f"override {item!r}: expected key=value")
        try:
            out[key.strip()] = yaml.safe_load(raw)
        except yaml.YAMLError as exc:
            raise ConfigError(f"override {item!r}: {exc}") from exc
    return out
