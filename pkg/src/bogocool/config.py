"""Run configuration: strict INI-style parsing with units carried in key names.

Every physical quantity is written as ``<name>_<unit>``; the unit suffix is
converted to SI here and nowhere else. Unknown keys, unknown units, a quantity
given twice, or a missing required key all raise :class:`ConfigError` naming the
line and key.
"""

from __future__ import annotations

import configparser
import math
import re
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from .physical_system import AMU, BOHR, SystemParams

MODES = ("rates", "evolve", "dissipation", "equilibrium", "semiclassical", "compare", "onedim", "sweep")
FORMATS = ("csv", "json")


class ConfigError(ValueError):
    def __init__(self, message, key=None, line=None):
        where = []
        if line is not None:
            where.append(f"line {line}")
        if key is not None:
            where.append(f"key {key!r}")
        super().__init__(f"{', '.join(where)}: {message}" if where else message)
        self.key = key
        self.line = line


# quantity -> {unit suffix: factor to SI}
_UNITS = {
    "mass_a": {"amu": AMU, "kg": 1.0},
    "mass_b": {"amu": AMU, "kg": 1.0},
    "a_ab": {"nm": 1e-9, "m": 1.0, "bohr": BOHR},
    "a_bb": {"nm": 1e-9, "m": 1.0, "bohr": BOHR},
    "rho0": {"per_cm3": 1e6, "per_m3": 1.0},
    "omega": {"hz": 2 * math.pi, "rad_s": 1.0},
    "temperature": {"nk": 1e-9, "uk": 1e-6, "k": 1.0},
    "rho0_1d": {"per_um": 1e6, "per_m": 1.0},
    "l_perp": {"nm": 1e-9, "um": 1e-6, "m": 1.0},
    "g_ab_1d": {"j_m": 1.0},
}
_SI_SUFFIX = {"mass_a": "kg", "mass_b": "kg", "a_ab": "m", "a_bb": "m", "rho0": "per_m3",
              "omega": "rad_s", "temperature": "k", "rho0_1d": "per_m", "l_perp": "m",
              "g_ab_1d": "j_m"}

_SECTION_QUANTITIES = {
    "system": ("mass_a", "mass_b", "a_ab", "a_bb", "rho0", "omega", "temperature"),
    "onedim": ("rho0_1d", "l_perp", "g_ab_1d"),
}
# sweepable quantity -> SystemParams / OneDimParams field
SWEEP_FIELDS = {"mass_a": "m_a", "mass_b": "m_b", "a_ab": "a_ab", "a_bb": "a_bb", "rho0": "rho0",
                "omega": "omega", "temperature": "temperature", "rho0_1d": "rho0_1d",
                "l_perp": "l_perp"}

_PLAIN = {
    "run": {"mode": str, "n_max": int, "rate_mode": str, "initial_level": int, "method": str},
    "time": {"t_end_cycles": float, "t_start_cycles": float, "n_points": int, "spacing": str},
    "sweep": {"parameter": str, "start": float, "stop": float, "count": int, "scale": str},
    "output": {"directory": str, "formats": str},
    "tolerances": {"quad_rel_tol": float, "drift_limit": float},
    "semiclassical": {"a_min": float, "a_max": float, "a_count": int, "n_initial": int},
    "onedim": {"gamma_lo": float, "gamma_hi": float},
    "system": {},
}


def split_unit_key(key: str):
    """'rho0_per_cm3' -> ('rho0', 'per_cm3'); None if no known quantity prefix."""
    for q in sorted(_UNITS, key=len, reverse=True):
        if key.startswith(q + "_"):
            return q, key[len(q) + 1:]
    return None


def to_si(quantity: str, unit: str, value: float) -> float:
    try:
        return value * _UNITS[quantity][unit]
    except KeyError:
        raise ConfigError(f"unknown unit {unit!r} for {quantity}; "
                          f"expected one of {sorted(_UNITS.get(quantity, {}))}", key=f"{quantity}_{unit}")


@dataclass(frozen=True)
class TimeSpec:
    t_end: float = 10.0
    n_points: int = 101
    spacing: str = "linear"
    t_start: Optional[float] = None

    def grid(self) -> np.ndarray:
        if self.spacing == "linear":
            start = 0.0 if self.t_start is None else self.t_start
            return np.linspace(start, self.t_end, self.n_points)
        start = self.t_end * 1e-4 if self.t_start is None else self.t_start
        return np.geomspace(start, self.t_end, self.n_points)


@dataclass(frozen=True)
class SweepSpec:
    parameter: str
    start: float
    stop: float
    count: int
    scale: str = "log"

    @property
    def quantity(self):
        return split_unit_key(self.parameter)[0]

    def values_si(self) -> np.ndarray:
        q, unit = split_unit_key(self.parameter)
        if self.scale == "log":
            vals = np.geomspace(self.start, self.stop, self.count)
        else:
            vals = np.linspace(self.start, self.stop, self.count)
        return np.array([to_si(q, unit, float(v)) for v in vals])

    def values(self) -> np.ndarray:
        if self.scale == "log":
            return np.geomspace(self.start, self.stop, self.count)
        return np.linspace(self.start, self.stop, self.count)


@dataclass(frozen=True)
class SemiclassicalSpec:
    a_min: float = 0.5
    a_max: float = 30.0
    a_count: int = 60
    n_initial: int = 10


@dataclass(frozen=True)
class OneDimSpec:
    rho0_1d: Optional[float] = None
    l_perp: Optional[float] = None
    g_ab_1d: Optional[float] = None
    gamma_lo: float = 0.3
    gamma_hi: float = 10.0


@dataclass(frozen=True)
class RunConfig:
    mode: str
    system: dict                      # SI values keyed by quantity name
    n_max: int = 100
    rate_mode: str = "Auto"
    initial_level: int = 1
    method: str = "Expm"
    time: TimeSpec = field(default_factory=TimeSpec)
    sweep: Optional[SweepSpec] = None
    output_dir: str = "out"
    formats: tuple = ("csv",)
    quad_rel_tol: float = 1e-10
    drift_limit: float = 1e-9
    semiclassical: SemiclassicalSpec = field(default_factory=SemiclassicalSpec)
    onedim: OneDimSpec = field(default_factory=OneDimSpec)

    def system_params(self, **overrides) -> SystemParams:
        s = dict(self.system)
        s.update(overrides)
        missing = [q for q in ("mass_a", "mass_b", "a_ab", "a_bb", "rho0", "omega") if q not in s]
        if missing:
            raise ConfigError(f"[system] needs {', '.join(missing)} for mode {self.mode!r}")
        return SystemParams(m_a=s["mass_a"], m_b=s["mass_b"], a_ab=s["a_ab"], a_bb=s["a_bb"],
                            rho0=s["rho0"], omega=s["omega"], temperature=s.get("temperature", 0.0))

    def with_mode(self, mode: str) -> "RunConfig":
        return replace(self, mode=mode)

    def to_text(self) -> str:
        """Canonical config text (SI suffixes) that parses back to an equal RunConfig."""
        lines = ["[system]"]
        for q in _SECTION_QUANTITIES["system"]:
            if q in self.system:
                lines.append(f"{q}_{_SI_SUFFIX[q]} = {self.system[q]!r}")
        lines += ["", "[run]", f"mode = {self.mode}", f"n_max = {self.n_max}",
                  f"rate_mode = {self.rate_mode}", f"initial_level = {self.initial_level}",
                  f"method = {self.method}"]
        t = self.time
        lines += ["", "[time]", f"t_end_cycles = {t.t_end!r}", f"n_points = {t.n_points}",
                  f"spacing = {t.spacing}"]
        if t.t_start is not None:
            lines.append(f"t_start_cycles = {t.t_start!r}")
        if self.sweep is not None:
            s = self.sweep
            lines += ["", "[sweep]", f"parameter = {s.parameter}", f"start = {s.start!r}",
                      f"stop = {s.stop!r}", f"count = {s.count}", f"scale = {s.scale}"]
        lines += ["", "[output]", f"directory = {self.output_dir}", f"formats = {','.join(self.formats)}",
                  "", "[tolerances]", f"quad_rel_tol = {self.quad_rel_tol!r}",
                  f"drift_limit = {self.drift_limit!r}"]
        sc = self.semiclassical
        lines += ["", "[semiclassical]", f"a_min = {sc.a_min!r}", f"a_max = {sc.a_max!r}",
                  f"a_count = {sc.a_count}", f"n_initial = {sc.n_initial}"]
        od = self.onedim
        lines += ["", "[onedim]", f"gamma_lo = {od.gamma_lo!r}", f"gamma_hi = {od.gamma_hi!r}"]
        for q in _SECTION_QUANTITIES["onedim"]:
            v = getattr(od, q)
            if v is not None:
                lines.append(f"{q}_{_SI_SUFFIX[q]} = {v!r}")
        return "\n".join(lines) + "\n"


# --------------------------------------------------------------------------
# Parsing
# --------------------------------------------------------------------------

_KEY_LINE = re.compile(r"^\s*([A-Za-z0-9_]+)\s*[=:]")
_SECTION_LINE = re.compile(r"^\s*\[([^\]]+)\]")


def _line_index(text: str) -> dict:
    where, section = {}, None
    for i, raw in enumerate(text.splitlines(), 1):
        m = _SECTION_LINE.match(raw)
        if m:
            section = m.group(1).strip()
            where.setdefault((section, None), i)
            continue
        m = _KEY_LINE.match(raw)
        if m and section is not None:
            where.setdefault((section, m.group(1).lower()), i)
    return where


def _convert(kind, raw, key, line):
    try:
        if kind is int:
            v = float(raw)
            if not v.is_integer():
                raise ValueError
            return int(v)
        if kind is float:
            v = float(raw)
            if not math.isfinite(v):
                raise ValueError
            return v
        return raw.strip()
    except ValueError:
        raise ConfigError(f"expected {'an integer' if kind is int else 'a finite number'}, got {raw!r}",
                          key=key, line=line) from None


def parse_config(text: str, mode: Optional[str] = None) -> RunConfig:
    """Parse config text. ``mode`` (e.g. from the command line) must agree with [run] mode if both exist."""
    cp = configparser.ConfigParser(inline_comment_prefixes=("#", ";"), strict=True,
                                   interpolation=None, default_section="__none__")
    try:
        cp.read_string(text)
    except configparser.MissingSectionHeaderError as e:
        raise ConfigError("key outside any [section]", line=e.lineno) from None
    except (configparser.DuplicateOptionError, configparser.DuplicateSectionError) as e:
        raise ConfigError(str(e).split(": ", 1)[-1], line=getattr(e, "lineno", None)) from None
    except configparser.Error as e:
        raise ConfigError(str(e)) from None
    lines = _line_index(text)

    values = {}
    system, onedim_q = {}, {}
    for section in cp.sections():
        if section not in _PLAIN:
            raise ConfigError(f"unknown section [{section}]; expected one of {sorted(_PLAIN)}",
                              line=lines.get((section, None)))
        for key, raw in cp.items(section):
            line = lines.get((section, key))
            quantities = _SECTION_QUANTITIES.get(section, ())
            split = split_unit_key(key)
            if split and split[0] in quantities:
                q, unit = split
                target = system if section == "system" else onedim_q
                if q in target:
                    raise ConfigError(f"{q} is given more than once (with different units)", key=key, line=line)
                if unit not in _UNITS[q]:
                    raise ConfigError(f"unit mismatch: {unit!r} is not a unit of {q}; "
                                      f"use one of {sorted(_UNITS[q])}", key=key, line=line)
                target[q] = to_si(q, unit, _convert(float, raw, key, line))
                continue
            if key in quantities:
                raise ConfigError(f"{key} needs a unit suffix, e.g. {key}_{_SI_SUFFIX[key]}", key=key, line=line)
            if key not in _PLAIN[section]:
                raise ConfigError(f"unknown key in [{section}]", key=key, line=line)
            values[(section, key)] = _convert(_PLAIN[section][key], raw, key, line)

    def get(section, key, default=None):
        return values.get((section, key), default)

    file_mode = get("run", "mode")
    if mode is not None and file_mode is not None and mode != file_mode:
        raise ConfigError(f"command line asks for mode {mode!r} but the file says {file_mode!r}",
                          key="mode", line=lines.get(("run", "mode")))
    chosen = mode or file_mode
    if chosen is None:
        raise ConfigError("missing required key: no mode given on the command line or in [run]", key="mode")
    if chosen not in MODES:
        raise ConfigError(f"unknown mode {chosen!r}; expected one of {', '.join(MODES)}", key="mode",
                          line=lines.get(("run", "mode")))

    formats = tuple(f.strip().lower() for f in get("output", "formats", "csv").split(",") if f.strip())
    if not formats or any(f not in FORMATS for f in formats):
        raise ConfigError(f"formats must be a non-empty subset of {FORMATS}", key="formats",
                          line=lines.get(("output", "formats")))

    spacing = get("time", "spacing", "linear")
    if spacing not in ("linear", "log"):
        raise ConfigError("spacing must be 'linear' or 'log'", key="spacing", line=lines.get(("time", "spacing")))
    time = TimeSpec(t_end=get("time", "t_end_cycles", 10.0), n_points=get("time", "n_points", 101),
                    spacing=spacing, t_start=get("time", "t_start_cycles"))
    if time.t_end <= 0 or time.n_points < 1 or (time.t_start is not None and not 0 <= time.t_start < time.t_end):
        raise ConfigError("time grid needs t_end_cycles > 0, n_points >= 1 and 0 <= t_start < t_end",
                          key="t_end_cycles", line=lines.get(("time", "t_end_cycles")))
    if spacing == "log" and time.t_start == 0:
        raise ConfigError("log spacing needs t_start_cycles > 0", key="t_start_cycles",
                          line=lines.get(("time", "t_start_cycles")))

    sweep = None
    if chosen == "sweep":
        for k in ("parameter", "start", "stop", "count"):
            if ("sweep", k) not in values:
                raise ConfigError(f"missing required key in [sweep] for mode 'sweep'", key=k)
        param = get("sweep", "parameter")
        split = split_unit_key(param)
        if split is None or split[0] not in SWEEP_FIELDS or split[1] not in _UNITS[split[0]]:
            raise ConfigError(f"sweep parameter must be a unit-suffixed physical field such as "
                              f"rho0_per_cm3, got {param!r}", key="parameter", line=lines.get(("sweep", "parameter")))
        scale = get("sweep", "scale", "log")
        if scale not in ("linear", "log"):
            raise ConfigError("scale must be 'linear' or 'log'", key="scale", line=lines.get(("sweep", "scale")))
        sweep = SweepSpec(param, get("sweep", "start"), get("sweep", "stop"), get("sweep", "count"), scale)
        if sweep.count < 1 or (scale == "log" and min(sweep.start, sweep.stop) <= 0):
            raise ConfigError("sweep needs count >= 1 and positive bounds for log scale", key="count",
                              line=lines.get(("sweep", "count")))

    n_max = get("run", "n_max", 100)
    if n_max < 1:
        raise ConfigError("n_max must be >= 1", key="n_max", line=lines.get(("run", "n_max")))
    rate_mode = get("run", "rate_mode", "Auto")
    if rate_mode not in ("Auto", "Supersonic", "Subsonic", "General"):
        raise ConfigError("rate_mode must be Auto, Supersonic, Subsonic or General", key="rate_mode",
                          line=lines.get(("run", "rate_mode")))
    method = get("run", "method", "Expm")
    if method not in ("Expm", "RK4"):
        raise ConfigError("method must be Expm or RK4", key="method", line=lines.get(("run", "method")))
    initial = get("run", "initial_level", 1)
    if not 0 <= initial <= n_max:
        raise ConfigError(f"initial_level must lie in 0..n_max={n_max}", key="initial_level",
                          line=lines.get(("run", "initial_level")))
    rel_tol = get("tolerances", "quad_rel_tol", 1e-10)
    if not 0 < rel_tol <= 1e-3:
        raise ConfigError("quad_rel_tol must lie in (0, 1e-3]", key="quad_rel_tol",
                          line=lines.get(("tolerances", "quad_rel_tol")))

    sc = SemiclassicalSpec(**{k: get("semiclassical", k, getattr(SemiclassicalSpec, k))
                              for k in ("a_min", "a_max", "a_count", "n_initial")})
    if not (0 < sc.a_min <= sc.a_max and sc.a_count >= 1 and sc.n_initial >= 1):
        raise ConfigError("[semiclassical] needs 0 < a_min <= a_max, a_count >= 1, n_initial >= 1")
    od = OneDimSpec(rho0_1d=onedim_q.get("rho0_1d"), l_perp=onedim_q.get("l_perp"),
                    g_ab_1d=onedim_q.get("g_ab_1d"), gamma_lo=get("onedim", "gamma_lo", 0.3),
                    gamma_hi=get("onedim", "gamma_hi", 10.0))

    cfg = RunConfig(
        mode=chosen, system=system, n_max=n_max, rate_mode=rate_mode, initial_level=initial,
        method=method, time=time, sweep=sweep, output_dir=get("output", "directory", "out"),
        formats=formats, quad_rel_tol=rel_tol, drift_limit=get("tolerances", "drift_limit", 1e-9),
        semiclassical=sc, onedim=od,
    )
    _check_required(cfg)
    return cfg


_NEEDS_3D = {"rates", "evolve", "dissipation", "semiclassical", "compare"}


def _check_required(cfg: RunConfig):
    need = []
    if cfg.mode in _NEEDS_3D:
        need = ["mass_a", "mass_b", "a_ab", "a_bb", "rho0", "omega"]
    elif cfg.mode == "equilibrium":
        need = ["omega"]
    elif cfg.mode == "onedim" or (cfg.mode == "sweep" and cfg.sweep.quantity in ("rho0_1d", "l_perp")):
        need = ["mass_a", "mass_b", "a_ab", "a_bb", "omega"]
        for q in ("rho0_1d", "l_perp"):
            if getattr(cfg.onedim, q) is None:
                raise ConfigError(f"missing required key [onedim] {q}_<unit> for mode {cfg.mode!r}", key=q)
    elif cfg.mode == "sweep":
        need = ["mass_a", "mass_b", "a_ab", "a_bb", "rho0", "omega"]
    for q in need:
        if q not in cfg.system:
            raise ConfigError(f"missing required key [system] {q}_<unit> for mode {cfg.mode!r}", key=q)


def load_config(path, mode: Optional[str] = None) -> RunConfig:
    try:
        with open(path, "rb") as fh:
            data = fh.read()
    except OSError as e:
        raise ConfigError(f"cannot read config {path}: {e.strerror}") from None
    try:
        text = data.decode("utf-8")
    except UnicodeDecodeError as e:
        raise ConfigError(f"config is not valid UTF-8 ({e})") from None
    return parse_config(text, mode)


__all__ = ["ConfigError", "RunConfig", "TimeSpec", "SweepSpec", "SemiclassicalSpec", "OneDimSpec",
           "parse_config", "load_config", "split_unit_key", "to_si", "MODES", "FORMATS", "SWEEP_FIELDS"]
