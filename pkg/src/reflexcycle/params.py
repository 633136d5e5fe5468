"""Model parameters, validation, derived timescales and the key-value config format.

The config format is one ``key = value`` per line with ``#`` comments.  Model
keys are the ASCII names of the notation table (``delta``, ``c0``,
``lambda``...); engine/solver/analysis settings use dotted keys such as
``solver.tol`` or ``engine.seed``.  All model keys are required in a config
file; dotted settings fall back to their defaults.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, fields, replace
from typing import Any, Mapping


class ConfigError(ValueError):
    """Base class for configuration problems; ``field`` names the offending key."""

    def __init__(self, field: str, message: str):
        self.field = field
        super().__init__(f"{field}: {message}")


class UnknownKeyError(ConfigError):
    pass


class MissingKeyError(ConfigError):
    pass


class RangeError(ConfigError):
    pass


class ParseError(ConfigError):
    pass


class CouplingMode(str, enum.Enum):
    SIMULTANEOUS = "simultaneous"
    LAGGED = "lagged"


@dataclass(frozen=True)
class SolverSettings:
    tol: float = 1e-12  # absolute, on rescaled consumption
    max_iter: int = 200
    fp_tol: float = 1e-10  # relative, capital fixed point
    fp_max_iter: int = 200


@dataclass(frozen=True)
class EngineSettings:
    horizon: int = 200_000
    burn_in: int = 2_000
    seed: int = 0


@dataclass(frozen=True)
class AnalysisSettings:
    phase_threshold: float = 1e-2
    permanent_threshold: float = 0.99
    hist_bins: int = 50


@dataclass(frozen=True)
class ModelParams:
    """All fixed and studied parameters plus solver/engine settings.

    Instances are validated on construction and immutable afterwards; use
    :func:`with_overrides` or :func:`dataclasses.replace` to derive variants.
    """

    gamma: float = 1.0
    alpha: float = 1.0 / 3.0
    rho: float = 7.0
    z0: float = 0.05
    eta: float = 0.5
    sigma_z: float = 0.15
    delta: float = 0.005
    r: float = 0.0015
    pi: float = 0.001
    a: float = 15.0
    c0: float = 0.017
    theta_c: float = 300.0
    g_min: float = 0.05
    g_max: float = 0.95
    lam: float = 0.95
    nu: float = 1.0
    n_scale: float = 0.25
    theta_k: float = 15.0
    f_min: float = 0.0
    f_max: float = 1.0
    sigma_floor: float = 1e-8
    s_cap: float = 10.0
    coupling_mode: CouplingMode = CouplingMode.SIMULTANEOUS
    solver: SolverSettings = field(default_factory=SolverSettings)
    engine: EngineSettings = field(default_factory=EngineSettings)
    analysis: AnalysisSettings = field(default_factory=AnalysisSettings)

    def __post_init__(self):
        if not isinstance(self.coupling_mode, CouplingMode):
            object.__setattr__(self, "coupling_mode", _parse_mode(self.coupling_mode))
        validate(self)


# config key -> attribute name, for the model-level (required) keys
_MODEL_KEYS = {
    "gamma": "gamma",
    "alpha": "alpha",
    "rho": "rho",
    "z0": "z0",
    "eta": "eta",
    "sigma_z": "sigma_z",
    "delta": "delta",
    "r": "r",
    "pi": "pi",
    "a": "a",
    "c0": "c0",
    "theta_c": "theta_c",
    "g_min": "g_min",
    "g_max": "g_max",
    "lambda": "lam",
    "nu": "nu",
    "n_scale": "n_scale",
    "theta_k": "theta_k",
    "f_min": "f_min",
    "f_max": "f_max",
}
_OPTIONAL_KEYS = {"sigma_floor": "sigma_floor", "s_cap": "s_cap", "coupling_mode": "coupling_mode"}
_SECTIONS = {"solver": SolverSettings, "engine": EngineSettings, "analysis": AnalysisSettings}


def config_keys() -> list[str]:
    """Every key accepted by :func:`load`, in the order :func:`save` writes them."""
    keys = list(_MODEL_KEYS) + list(_OPTIONAL_KEYS)
    for section, cls in _SECTIONS.items():
        keys += [f"{section}.{f.name}" for f in fields(cls)]
    return keys


def defaults() -> ModelParams:
    """Baseline parameter set (studied parameters at the HkHc benchmark)."""
    return ModelParams()


def _check(ok: bool, name: str, message: str):
    if not ok:
        raise RangeError(name, message)


def _finite(x: float) -> bool:
    return isinstance(x, (int, float)) and math.isfinite(x)


def validate(p: ModelParams) -> None:
    for key, attr in {**_MODEL_KEYS, "sigma_floor": "sigma_floor", "s_cap": "s_cap"}.items():
        v = getattr(p, attr)
        if key == "a":
            _check(isinstance(v, (int, float)) and not math.isnan(v), key, "must be a number")
        else:
            _check(_finite(v), key, f"must be a finite number, got {v!r}")
    _check(p.gamma > 0, "gamma", "must be > 0")
    _check(0 < p.alpha < 1, "alpha", "must lie in (0, 1)")
    _check(p.rho > 0, "rho", "must be > 0")
    _check(p.z0 > 0, "z0", "must be > 0")
    _check(0 <= p.eta < 1, "eta", "must lie in [0, 1)")
    _check(p.sigma_z >= 0, "sigma_z", "must be >= 0")
    _check(0 <= p.delta < 1, "delta", "must lie in [0, 1)")
    _check(p.r > -1, "r", "must be > -1")
    _check(p.pi > -1, "pi", "must be > -1")
    _check(p.a > 0, "a", "must be > 0 (inf disables risk)")
    _check(p.theta_c >= 0, "theta_c", "must be >= 0")
    _check(0 <= p.g_min < 1, "g_min", "must lie in [0, 1)")
    _check(p.g_min < p.g_max <= 1, "g_max", "must satisfy g_min < g_max <= 1")
    _check(0 < p.lam < 1, "lambda", "must lie in (0, 1)")
    _check(0 <= p.nu <= 1, "nu", "must lie in [0, 1]")
    _check(p.theta_k >= 0, "theta_k", "must be >= 0")
    _check(0 <= p.f_min <= 1, "f_min", "must lie in [0, 1]")
    _check(p.f_min <= p.f_max <= 1, "f_max", "must satisfy f_min <= f_max <= 1")
    _check(p.sigma_floor > 0, "sigma_floor", "must be > 0")
    _check(p.s_cap > 0, "s_cap", "must be > 0")

    s = p.solver
    _check(_finite(s.tol) and s.tol > 0, "solver.tol", "must be > 0")
    _check(_is_int(s.max_iter) and s.max_iter >= 1, "solver.max_iter", "must be an integer >= 1")
    _check(_finite(s.fp_tol) and s.fp_tol > 0, "solver.fp_tol", "must be > 0")
    _check(_is_int(s.fp_max_iter) and s.fp_max_iter >= 1, "solver.fp_max_iter", "must be an integer >= 1")
    e = p.engine
    _check(_is_int(e.horizon) and e.horizon >= 0, "engine.horizon", "must be an integer >= 0")
    _check(_is_int(e.burn_in) and e.burn_in >= 0, "engine.burn_in", "must be an integer >= 0")
    _check(_is_int(e.seed) and e.seed >= 0, "engine.seed", "must be a non-negative integer")
    an = p.analysis
    _check(_finite(an.phase_threshold) and 0 < an.phase_threshold < 1, "analysis.phase_threshold", "must lie in (0, 1)")
    _check(_finite(an.permanent_threshold) and 0 < an.permanent_threshold <= 1,
           "analysis.permanent_threshold", "must lie in (0, 1]")
    _check(_is_int(an.hist_bins) and an.hist_bins >= 2, "analysis.hist_bins", "must be an integer >= 2")


def _is_int(v: Any) -> bool:
    return isinstance(v, int) and not isinstance(v, bool)


def derived_timescales(p: ModelParams) -> tuple[float, float, float]:
    """Memory, productivity and capital-replacement timescales, in periods.

    ``delta == 0`` (no depreciation) gives ``math.inf`` for the capital timescale;
    ``eta == 0`` gives 0 (shocks are uncorrelated).
    """
    t_lambda = 1.0 / abs(math.log(p.lam))
    t_eta = 0.0 if p.eta == 0 else 1.0 / abs(math.log(p.eta))
    t_delta = math.inf if p.delta == 0 else 1.0 / abs(math.log1p(-p.delta))
    return t_lambda, t_eta, t_delta


def lambda_for_timescale(t_lambda: float) -> float:
    """EMA gain giving the requested memory timescale."""
    return math.exp(-1.0 / t_lambda)


# --- parsing -----------------------------------------------------------------

def _parse_mode(v: Any) -> CouplingMode:
    try:
        return CouplingMode(str(v).strip().lower())
    except ValueError:
        raise ParseError("coupling_mode", f"expected one of {[m.value for m in CouplingMode]}, got {v!r}") from None


def _parse_value(key: str, raw: Any, kind: type) -> Any:
    if not isinstance(raw, str):
        return raw
    text = raw.strip()
    try:
        if kind is int:
            return int(text)
        if kind is CouplingMode:
            return _parse_mode(text)
        return float(text)
    except ValueError:
        raise ParseError(key, f"cannot parse {raw!r} as {kind.__name__}") from None


def _key_type(key: str) -> type:
    if key == "coupling_mode":
        return CouplingMode
    if "." in key:
        section, name = key.split(".", 1)
        default = getattr(_SECTIONS[section](), name)
        return int if _is_int(default) else float
    return float


def _resolve(key: str) -> tuple[str | None, str]:
    key = key.strip()
    if key in _MODEL_KEYS:
        return None, _MODEL_KEYS[key]
    if key in _OPTIONAL_KEYS:
        return None, _OPTIONAL_KEYS[key]
    if "." in key:
        section, name = key.split(".", 1)
        cls = _SECTIONS.get(section)
        if cls is not None and name in {f.name for f in fields(cls)}:
            return section, name
    raise UnknownKeyError(key, "unknown configuration key")


def with_overrides(p: ModelParams, overrides: Mapping[str, Any]) -> ModelParams:
    """Apply ``{config_key: value}`` overrides (strings are parsed); last one wins."""
    top: dict[str, Any] = {}
    sections: dict[str, dict[str, Any]] = {}
    for key, raw in overrides.items():
        section, attr = _resolve(key)
        value = _parse_value(key.strip(), raw, _key_type(key.strip()))
        if section is None:
            top[attr] = value
        else:
            sections.setdefault(section, {})[attr] = value
    for section, changes in sections.items():
        top[section] = replace(getattr(p, section), **changes)
    return replace(p, **top)


def parse_lines(text: str) -> dict[str, str]:
    """Split config text into an ordered ``{key: raw value}`` mapping."""
    out: dict[str, str] = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ParseError(f"line {lineno}", f"expected 'key = value', got {line!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        out[key] = value
    return out


def load(config_text: str) -> ModelParams:
    entries = parse_lines(config_text)
    for key in entries:
        _resolve(key)
    for key in _MODEL_KEYS:
        if key not in entries:
            raise MissingKeyError(key, "required key missing from config")
    return with_overrides(ModelParams(), entries)


def _fmt(v: Any) -> str:
    if isinstance(v, CouplingMode):
        return v.value
    return repr(v)


def save(p: ModelParams) -> str:
    lines = ["# model parameters"]
    for key, attr in {**_MODEL_KEYS, **_OPTIONAL_KEYS}.items():
        lines.append(f"{key} = {_fmt(getattr(p, attr))}")
    for section, cls in _SECTIONS.items():
        lines.append(f"# {section} settings")
        obj = getattr(p, section)
        for f in fields(cls):
            lines.append(f"{section}.{f.name} = {_fmt(getattr(obj, f.name))}")
    return "\n".join(lines) + "\n"


def as_dict(p: ModelParams) -> dict[str, Any]:
    """Flat ``{config_key: value}`` view, JSON-friendly."""
    return {k: (v.value if isinstance(v, CouplingMode) else v) for k, v in
            ((key, _get(p, key)) for key in config_keys())}


def _get(p: ModelParams, key: str) -> Any:
    section, attr = _resolve(key)
    return getattr(p if section is None else getattr(p, section), attr)
