"""Run configuration: INI text with dotted section names.

Example::

    [model]
    n = 2
    fields = 1
    metric = +-
    mass = 1.0

    [quantum.grid]
    levels = 4

Every key has a default; unknown sections or keys are errors.
"""
from __future__ import annotations

import configparser
import math
from dataclasses import dataclass, field, fields, replace
from importlib import resources
from pathlib import Path

from .errors import PrecanonicalError


class ConfigError(PrecanonicalError, ValueError):
    pass


def _floats(text: str) -> tuple[float, ...]:
    return tuple(float(t) for t in text.replace(",", " ").split())


def default_solution() -> str:
    return str(resources.files("precanonical") / "data" / "plane_wave.csv")


@dataclass(frozen=True)
class ModelSection:
    n: int = 2
    fields: int = 1
    metric: str = ""  # e.g. "+-"; empty means Minkowski
    mass: float = 1.0
    hbar: float = 1.0
    kappa: float = 1.0
    potential: str = ""  # polynomial in y[0]; empty means the free field

    @property
    def signs(self) -> tuple[int, ...]:
        if not self.metric:
            return (1,) + (-1,) * (self.n - 1)
        return tuple(1 if c == "+" else -1 for c in self.metric)


@dataclass(frozen=True)
class BracketsSection:
    samples: int = 50
    max_degree: int = 2


@dataclass(frozen=True)
class DWSection:
    solution: str = ""
    tolerance: float = 1e-10


@dataclass(frozen=True)
class QuantumSection:
    n_max: int = 10
    k: tuple[float, ...] = (0.8,)  # wavenumbers along the first spatial axis, one mode each
    fd_points: int = 2000
    tolerance: float = 1e-8
    fd_tolerance: float = 1e-4


@dataclass(frozen=True)
class QuantumGridSection:
    # empty means [0, 1] on every spacetime axis and [-1, 1] on y
    lows: tuple[float, ...] = ()
    highs: tuple[float, ...] = ()
    base_points: int = 11
    levels: int = 4
    order_tolerance: float = 0.1


@dataclass(frozen=True)
class WKBSection:
    points: int = 16
    kappas: tuple[float, ...] = (0.01, 0.02, 0.05, 0.1, 0.2, 0.5, 1.0)
    exponent_tolerance: float = 0.02


@dataclass(frozen=True)
class VacuumSection:
    Q: float = 2 * math.pi
    vbox: float = 1.0
    band: float = 0.01  # largest hbar |k| / m
    k_points: int = 101
    counterfactual: bool = False


@dataclass(frozen=True)
class RunSection:
    seed: int = 0


@dataclass(frozen=True)
class RunConfig:
    model: ModelSection = field(default_factory=ModelSection)
    brackets: BracketsSection = field(default_factory=BracketsSection)
    dw: DWSection = field(default_factory=DWSection)
    quantum: QuantumSection = field(default_factory=QuantumSection)
    quantum_grid: QuantumGridSection = field(default_factory=QuantumGridSection)
    wkb: WKBSection = field(default_factory=WKBSection)
    vacuum: VacuumSection = field(default_factory=VacuumSection)
    run: RunSection = field(default_factory=RunSection)

    def to_dict(self) -> dict:
        out = {}
        for f in fields(self):
            sec = getattr(self, f.name)
            out[f.name.replace("_", ".")] = {g.name: getattr(sec, g.name) for g in fields(sec)}
        return out

    @property
    def solution_path(self) -> str:
        return self.dw.solution or default_solution()


def _convert(section: str, key: str, raw: str, default):
    try:
        if isinstance(default, bool):
            low = raw.strip().lower()
            if low not in ("true", "false", "yes", "no", "1", "0"):
                raise ValueError(raw)
            return low in ("true", "yes", "1")
        if isinstance(default, int):
            return int(raw)
        if isinstance(default, float):
            return float(raw)
        if isinstance(default, tuple):
            return _floats(raw)
        return raw.strip()
    except ValueError:
        raise ConfigError(f"[{section}] {key}: cannot parse {raw!r}") from None


def _check_positive(where: str, value) -> None:
    values = value if isinstance(value, tuple) else (value,)
    for v in values:
        if not (math.isfinite(v) and v > 0):
            raise ConfigError(f"{where} must be positive and finite, got {value!r}")


def validate(cfg: RunConfig) -> RunConfig:
    m = cfg.model
    if not 1 <= m.n <= 6:
        raise ConfigError(f"model.n must be in 1..6, got {m.n}")
    if m.fields < 1:
        raise ConfigError("model.fields must be >= 1")
    if m.metric and (len(m.metric) != m.n or set(m.metric) - {"+", "-"}):
        raise ConfigError(f"model.metric must be {m.n} characters of + and -, got {m.metric!r}")
    for key in ("mass", "hbar", "kappa"):
        _check_positive(f"model.{key}", getattr(m, key))
    _check_positive("dw.tolerance", cfg.dw.tolerance)
    q = cfg.quantum
    if q.n_max < 0:
        raise ConfigError("quantum.n_max must be >= 0")
    if len(q.k) != 0 and any(not math.isfinite(v) for v in q.k):
        raise ConfigError("quantum.k must be finite")
    if q.fd_points < 3 * (q.n_max + 1):
        raise ConfigError("quantum.fd_points too small for the requested n_max")
    _check_positive("quantum.tolerance", q.tolerance)
    _check_positive("quantum.fd_tolerance", q.fd_tolerance)
    g = cfg.quantum_grid
    if not g.lows and not g.highs:
        g = replace(g, lows=(0.0,) * m.n + (-1.0,), highs=(1.0,) * m.n + (1.0,))
        cfg = replace(cfg, quantum_grid=g)
    if len(g.lows) != m.n + 1 or len(g.highs) != m.n + 1:
        raise ConfigError(f"quantum.grid lows/highs need {m.n + 1} entries (x..., y)")
    if any(not hi > lo for lo, hi in zip(g.lows, g.highs)):
        raise ConfigError("quantum.grid highs must exceed lows")
    if g.base_points < 5 or g.levels < 2:
        raise ConfigError("quantum.grid needs base_points >= 5 and levels >= 2")
    _check_positive("quantum.grid.order_tolerance", g.order_tolerance)
    if cfg.wkb.points < 1:
        raise ConfigError("wkb.points must be >= 1")
    _check_positive("wkb.kappas", cfg.wkb.kappas)
    if len(cfg.wkb.kappas) < 2:
        raise ConfigError("wkb.kappas needs at least two values")
    v = cfg.vacuum
    for key in ("Q", "vbox"):
        _check_positive(f"vacuum.{key}", getattr(v, key))
    if not (math.isfinite(v.band) and v.band >= 0):
        raise ConfigError("vacuum.band must be >= 0")
    if v.k_points < 1:
        raise ConfigError("vacuum.k_points must be >= 1")
    if cfg.brackets.samples < 1 or cfg.brackets.max_degree < 0:
        raise ConfigError("brackets.samples must be >= 1 and max_degree >= 0")
    return cfg


def parse_config(text: str) -> RunConfig:
    parser = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#", ";"))
    parser.optionxform = str
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(f"malformed config: {exc}") from None
    cfg = RunConfig()
    known = {f.name.replace("_", "."): f.name for f in fields(RunConfig)}
    for section in parser.sections():
        if section not in known:
            raise ConfigError(f"unknown section [{section}]")
        attr = known[section]
        current = getattr(cfg, attr)
        defaults = {f.name: getattr(current, f.name) for f in fields(current)}
        updates = {}
        for key, raw in parser.items(section):
            if key not in defaults:
                raise ConfigError(f"unknown key {key!r} in [{section}]")
            updates[key] = _convert(section, key, raw, defaults[key])
        cfg = replace(cfg, **{attr: replace(current, **updates)})
    if parser.defaults():
        raise ConfigError("keys outside any section are not allowed")
    return validate(cfg)


def load_config(path: str | Path | None) -> RunConfig:
    if path is None:
        return validate(RunConfig())
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    return parse_config(text)
