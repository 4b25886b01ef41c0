"""JSON scenario configuration: parsing, defaults and per-scenario validation."""

from __future__ import annotations

import copy
import dataclasses
import json
import math
import re
from dataclasses import dataclass

from .coeffs import ElasticConstants
from .errors import ParseError, ValidationError
from .profiles import PROFILE_FAMILIES

SCHEMA_VERSION = 1
SCENARIOS = (
    "dispersion",
    "solve1d",
    "twist-exact",
    "match-fast-twist",
    "hs-verify",
    "periodic",
    "polarized",
)
# g = -b0 f' sends all of the twist data into the right-moving wave
RIGHT_MOVING = "right-moving"

_TOP_KEYS = {
    "schema_version",
    "scenario",
    "elastic",
    "phi0",
    "grid",
    "resolutions",
    "epsilon",
    "profiles",
    "horizon",
    "cfl",
    "seed",
    "samples",
    "sigma_minus0",
    "mu",
    "amplitude",
    "tolerances",
    "output",
}
_NESTED_KEYS = {
    "elastic": {"alpha", "beta", "gamma"},
    "grid": {"x_min", "x_max", "n"},
    "output": {"dir", "series"},
    "profiles": {"f", "g"},
}

_QUARTER = math.pi / 4.0

DEFAULTS: dict[str, dict] = {
    "dispersion": {
        "elastic": {"alpha": 1.0, "beta": 2.0, "gamma": 3.0},
        "samples": 1000,
        "seed": 20240611,
        "tolerances": {"residual": 1e-10, "root_rtol": 1e-9, "degeneracy": 1e-6, "runtime_s": 5.0},
    },
    "solve1d": {
        "elastic": {"alpha": 1.0, "beta": 2.0, "gamma": 3.0},
        "phi0": _QUARTER,
        "grid": {"x_min": -10.0, "x_max": 10.0, "n": 2048},
        "horizon": 1.0,
        "cfl": 0.4,
        "amplitude": 1e-3,
        "tolerances": {"energy_drift": 1e-4, "phase_speed_rtol": 0.01},
    },
    "twist-exact": {
        "profiles": {"f": {"family": "gaussian-bump", "amplitude": 1.0, "center": 0.0, "width": 1.0}},
        "grid": {"x_min": -6.0, "x_max": 6.0, "n": 512},
        "resolutions": [512, 1024, 2048, 4096],
        "sigma_minus0": -0.3,
        "horizon": 1.0,
        "tolerances": {
            "order_min": 1.8,
            "order_max": 2.2,
            "boundary": 1e-8,
            "initial": 1e-12,
            "blowup_time": 2.1,
            "blowup_ceiling": 1e3,
            "runtime_s": 30.0,
        },
    },
    "match-fast-twist": {
        "elastic": {"alpha": 1.0, "beta": 2.0, "gamma": 3.0},
        "phi0": _QUARTER,
        "profiles": {
            "f": {"family": "gaussian-bump", "amplitude": 1.0, "center": 0.0, "width": 1.0},
            "g": {"family": RIGHT_MOVING},
        },
        # resolution used at eps = 0.1; finer eps scale it by 0.1 / eps
        "grid": {"n": 4096},
        "epsilon": [0.1, 0.05, 0.025],
        "horizon": 4.0,
        "cfl": 0.4,
        "tolerances": {"runtime_s": 600.0},
    },
    "hs-verify": {
        "grid": {"x_min": -16.0, "x_max": 16.0, "n": 201},
        "resolutions": [201, 401, 801],
        "tolerances": {"jacobi": 1e-8, "order_min": 1.8, "corruption_gain": 10.0},
    },
    "periodic": {
        "elastic": {"alpha": 3.0, "beta": 1.0, "gamma": 2.0},
        "phi0": math.pi / 2.0 - 0.3,
        "grid": {"n": 512},
        "mu": 10.0,
        "amplitude": 0.05,
        "tolerances": {"mean_drift": 1e-6, "M_agreement": 1e-6, "frequency_rtol": 0.05, "order_min": 1.8},
    },
    "polarized": {
        "elastic": {"alpha": 4.5, "beta": 2.1, "gamma": 3.0},
        "grid": {"x_min": -6.0, "x_max": 6.0, "n": 801},
        "resolutions": [201, 401, 801],
        "samples": 20,
        "seed": 7,
        "tolerances": {"plane_match": 1e-10, "identity": 1e-10, "order_min": 1.8},
    },
}

_COMMON = {
    "phi0": _QUARTER,
    "horizon": 1.0,
    "cfl": 0.4,
    "seed": 0,
    "samples": 0,
    "sigma_minus0": 0.0,
    "mu": 1.0,
    "amplitude": 1.0,
    "resolutions": [],
    "epsilon": [],
    "profiles": {},
    "grid": {},
    "elastic": {"alpha": 1.0, "beta": 2.0, "gamma": 3.0},
    "output": {"dir": ".", "series": True},
}


@dataclass(frozen=True)
class GridSpec:
    x_min: float | None = None
    x_max: float | None = None
    n: int | None = None


@dataclass(frozen=True)
class ScenarioConfig:
    scenario: str
    elastic: ElasticConstants
    phi0: float
    grid: GridSpec
    resolutions: tuple[int, ...]
    epsilon: tuple[float, ...]
    profiles: dict
    horizon: float
    cfl: float
    seed: int
    samples: int
    sigma_minus0: float
    mu: float
    amplitude: float
    tolerances: dict
    output_dir: str = "."
    series: bool = True
    schema_version: int = SCHEMA_VERSION

    def tol(self, name: str) -> float:
        return float(self.tolerances[name])

    def replace(self, **changes) -> "ScenarioConfig":
        return dataclasses.replace(self, **changes)


def _line_of(text: str, key: str) -> int | None:
    m = re.search(r'"' + re.escape(key) + r'"\s*:', text)
    return text.count("\n", 0, m.start()) + 1 if m else None


def _where(text: str, key: str) -> str:
    line = _line_of(text, key)
    return f" (line {line})" if line else ""


def _merge(base: dict, over: dict) -> dict:
    out = copy.deepcopy(base)
    for k, v in over.items():
        if isinstance(v, dict) and isinstance(out.get(k), dict) and k != "profiles":
            out[k] = _merge(out[k], v)
        else:
            out[k] = copy.deepcopy(v)
    return out


def _number(value, name: str, text: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)) or not math.isfinite(value):
        raise ValidationError(f"field {name!r}{_where(text, name.split('.')[-1])} must be a finite number, got {value!r}")
    return float(value)


def _integer(value, name: str, text: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise ValidationError(f"field {name!r}{_where(text, name.split('.')[-1])} must be an integer, got {value!r}")
    return int(value)


def _check_keys(raw: dict, text: str) -> None:
    for key in raw:
        if key not in _TOP_KEYS:
            raise ParseError(f"unknown key {key!r}{_where(text, key)}")
    for section, allowed in _NESTED_KEYS.items():
        sub = raw.get(section)
        if sub is None:
            continue
        if not isinstance(sub, dict):
            raise ParseError(f"field {section!r}{_where(text, section)} must be an object")
        for key in sub:
            if key not in allowed:
                raise ParseError(f"unknown key {section}.{key!r}{_where(text, key)}")
    for name, spec in (raw.get("profiles") or {}).items():
        if not isinstance(spec, dict):
            raise ParseError(f"profile {name!r}{_where(text, name)} must be an object")
        family = spec.get("family")
        if family == RIGHT_MOVING:
            allowed = {"family"}
        elif family in PROFILE_FAMILIES:
            allowed = {"family"} | {f.name for f in dataclasses.fields(PROFILE_FAMILIES[family])}
        else:
            choices = sorted(PROFILE_FAMILIES) + [RIGHT_MOVING]
            raise ParseError(f"profile {name!r}{_where(text, name)} has unknown family {family!r}; choose from {choices}")
        for key in spec:
            if key not in allowed:
                raise ParseError(f"unknown key profiles.{name}.{key!r}{_where(text, key)}")


def _is_right_angle_multiple(phi: float) -> bool:
    r = phi / (math.pi / 2.0)
    return abs(r - round(r)) <= 1e-9


def _validate(cfg: ScenarioConfig, text: str) -> None:
    s = cfg.scenario
    if cfg.horizon <= 0.0:
        raise ValidationError(f"field 'horizon'{_where(text, 'horizon')} must be positive")
    if not 0.0 < cfg.cfl <= 0.5:
        raise ValidationError(f"field 'cfl'{_where(text, 'cfl')} must lie in (0, 0.5]")
    if s in ("solve1d", "match-fast-twist") and _is_right_angle_multiple(cfg.phi0):
        raise ValidationError(
            f"field 'phi0'{_where(text, 'phi0')} = {cfg.phi0!r} violates φ0 ≠ nπ/2: "
            "the base state needs a0 != b0 and b0' != 0"
        )
    if s == "match-fast-twist":
        e = cfg.elastic
        if not e.alpha < e.beta:
            raise ValidationError(
                f"match-fast-twist needs alpha < beta (fast twist waves), got alpha={e.alpha}, beta={e.beta}"
            )
        if not cfg.epsilon:
            raise ValidationError("match-fast-twist needs at least one epsilon")
        for eps in cfg.epsilon:
            if not 0.0 < eps <= 0.5:
                raise ValidationError(f"epsilon {eps!r}{_where(text, 'epsilon')} must lie in (0, 0.5]")
        if "f" not in cfg.profiles or "g" not in cfg.profiles:
            raise ValidationError("match-fast-twist needs profiles f and g")
        if cfg.profiles["f"].get("family") == RIGHT_MOVING:
            raise ValidationError(f"profile f cannot use the {RIGHT_MOVING!r} family")
    if s == "twist-exact" and cfg.profiles.get("f", {}).get("family") == RIGHT_MOVING:
        raise ValidationError(f"profile f cannot use the {RIGHT_MOVING!r} family")
    if s in ("twist-exact", "hs-verify", "polarized"):
        if len(cfg.resolutions) < 3:
            raise ValidationError(f"{s} fits convergence orders and needs at least 3 resolutions")
        if any(n < 16 for n in cfg.resolutions) or list(cfg.resolutions) != sorted(set(cfg.resolutions)):
            raise ValidationError("resolutions must be increasing integers >= 16")
    if s == "hs-verify" and max(cfg.resolutions) > 1024:
        raise ValidationError("hs-verify builds dense operators; resolutions must not exceed 1024")
    if s == "periodic":
        if cfg.elastic.alpha == cfg.elastic.beta:
            raise ValidationError("periodic needs alpha != beta")
        if cfg.mu == 0.0:
            raise ValidationError("periodic needs a nonzero mu")
    if cfg.grid.n is not None and cfg.grid.n < 3:
        raise ValidationError("grid.n must be at least 3")
    if cfg.grid.x_min is not None and cfg.grid.x_max is not None and not cfg.grid.x_max > cfg.grid.x_min:
        raise ValidationError("grid.x_max must exceed grid.x_min")
    if s == "dispersion" and cfg.samples < 1:
        raise ValidationError("dispersion needs samples >= 1")


def parse_config(text: str) -> ScenarioConfig:
    """Parse JSON text into a validated ScenarioConfig with scenario defaults applied."""
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    if not isinstance(raw, dict):
        raise ParseError("the configuration must be a JSON object")
    _check_keys(raw, text)
    if "schema_version" not in raw:
        raise ParseError("missing required key 'schema_version'")
    if raw["schema_version"] != SCHEMA_VERSION:
        raise ParseError(f"unsupported schema_version {raw['schema_version']!r}{_where(text, 'schema_version')}; expected {SCHEMA_VERSION}")
    scenario = raw.get("scenario")
    if scenario not in SCENARIOS:
        raise ParseError(f"field 'scenario'{_where(text, 'scenario')} must be one of {list(SCENARIOS)}, got {scenario!r}")

    merged = _merge(_merge(_COMMON, DEFAULTS[scenario]), raw)
    unknown_tol = set(merged["tolerances"]) - set(DEFAULTS[scenario].get("tolerances", {}))
    if unknown_tol:
        key = sorted(unknown_tol)[0]
        raise ParseError(f"unknown key tolerances.{key!r}{_where(text, key)} for scenario {scenario!r}")

    el = merged["elastic"]
    try:
        elastic = ElasticConstants(*(_number(el[k], f"elastic.{k}", text) for k in ("alpha", "beta", "gamma")))
    except ValueError as exc:
        if isinstance(exc, ValidationError):
            raise
        raise ValidationError(str(exc)) from None
    g = merged["grid"]
    grid = GridSpec(
        x_min=None if g.get("x_min") is None else _number(g["x_min"], "grid.x_min", text),
        x_max=None if g.get("x_max") is None else _number(g["x_max"], "grid.x_max", text),
        n=None if g.get("n") is None else _integer(g["n"], "grid.n", text),
    )
    if not isinstance(merged["resolutions"], list) or not isinstance(merged["epsilon"], list):
        raise ValidationError("'resolutions' and 'epsilon' must be lists")
    out = merged["output"]
    cfg = ScenarioConfig(
        scenario=scenario,
        elastic=elastic,
        phi0=_number(merged["phi0"], "phi0", text),
        grid=grid,
        resolutions=tuple(_integer(n, "resolutions", text) for n in merged["resolutions"]),
        epsilon=tuple(_number(e, "epsilon", text) for e in merged["epsilon"]),
        profiles=merged["profiles"],
        horizon=_number(merged["horizon"], "horizon", text),
        cfl=_number(merged["cfl"], "cfl", text),
        seed=_integer(merged["seed"], "seed", text),
        samples=_integer(merged["samples"], "samples", text),
        sigma_minus0=_number(merged["sigma_minus0"], "sigma_minus0", text),
        mu=_number(merged["mu"], "mu", text),
        amplitude=_number(merged["amplitude"], "amplitude", text),
        tolerances={k: _number(v, f"tolerances.{k}", text) for k, v in merged["tolerances"].items()},
        output_dir=str(out.get("dir", ".")),
        series=bool(out.get("series", True)),
    )
    _validate(cfg, text)
    return cfg


def default_config(scenario: str) -> ScenarioConfig:
    return parse_config(json.dumps({"schema_version": SCHEMA_VERSION, "scenario": scenario}))
