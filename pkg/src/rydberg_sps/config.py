"""Flat ``section.key = value`` configuration files.

Every key is optional; missing keys take the material defaults and the
n=24, 4 um, 9 GHz, Purcell-2 operating point.  ``#`` starts a comment.
Errors carry the line number (or ``--set`` for command-line overrides).
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field

import numpy as np

from .exciton import CrystalGeometry, DriveConfig, ExcitonLevel, MaterialConstants, rabi_from_intensity

SECTIONS = ("material", "level", "geometry", "drive", "model", "sweep", "optimize", "output")
SWEEP_VARIABLES = ("drive_ratio", "side", "n")


class ConfigError(ValueError):
    def __init__(self, message, line=None):
        where = "" if line is None else f"line {line}: " if isinstance(line, int) else f"{line}: "
        super().__init__(where + message)
        self.line = line


@dataclass(frozen=True)
class ModelConfig:
    variant: str = "eq8"
    c3_source: str = "formula"
    c3: float | None = None  # GHz um^3; overrides c3_source
    tau_max: float = 10.0  # g2 window, in lifetimes 1/gamma
    tau_points: int = 201
    freq_margin: float = 25.0  # spectrum reaches omega' + margin * gamma
    freq_step: float = 0.05  # spectrum spacing, in units of gamma


@dataclass(frozen=True)
class SweepConfig:
    variable: str = "drive_ratio"
    values: tuple = tuple(0.5 * k for k in range(1, 21))
    workers: int = 1


@dataclass(frozen=True)
class OptimizeConfig:
    g2_max: float = 0.01
    rabi_min: float = 0.0
    rabi_max: float = 20.0
    side_min: float = 2.0
    side_max: float = 8.0
    rabi_points: int = 50
    side_points: int = 50


@dataclass(frozen=True)
class OutputConfig:
    format: str = "csv"
    path: str | None = None


@dataclass(frozen=True)
class Config:
    material: MaterialConstants = field(default_factory=MaterialConstants)
    level: ExcitonLevel = field(default_factory=ExcitonLevel)
    geometry: CrystalGeometry = field(default_factory=CrystalGeometry)
    drive: DriveConfig = field(default_factory=lambda: DriveConfig(rabi_single=9.0, purcell=2.0))
    model: ModelConfig = field(default_factory=ModelConfig)
    sweep: SweepConfig = field(default_factory=SweepConfig)
    optimize: OptimizeConfig = field(default_factory=OptimizeConfig)
    output: OutputConfig = field(default_factory=OutputConfig)

    def replace(self, **sections):
        return dataclasses.replace(self, **sections)

    def with_values(self, **dotted):
        """Copy with ``section__key=value`` style replacements."""
        updates = {}
        for name, value in dotted.items():
            section, key = name.split("__")
            updates.setdefault(section, {})[key] = value
        return self.replace(**{s: dataclasses.replace(getattr(self, s), **kv) for s, kv in updates.items()})


def _number(text):
    try:
        return float(text)
    except ValueError:
        raise ValueError(f"unparseable number {text!r}") from None


def _integer(text):
    v = _number(text)
    if v != int(v):
        raise ValueError(f"expected an integer, got {text!r}")
    return int(v)


def _number_list(text):
    parts = [p for p in text.replace(",", " ").split()]
    if not parts:
        raise ValueError("empty list")
    return tuple(_number(p) for p in parts)


def _choice(*options):
    def parse(text):
        if text not in options:
            raise ValueError(f"expected one of {', '.join(options)}, got {text!r}")
        return text

    return parse


def _check(parse, predicate, message):
    def wrapped(text):
        value = parse(text)
        if not predicate(value):
            raise ValueError(message)
        return value

    return wrapped


_positive = _check(_number, lambda v: v > 0, "must be > 0")
_non_negative = _check(_number, lambda v: v >= 0, "must be >= 0")
_count = _check(_integer, lambda v: v >= 1, "must be >= 1")

SCHEMA = {
    **{f"material.{f.name}": _positive for f in dataclasses.fields(MaterialConstants)},
    "level.n": _check(_integer, lambda v: v >= 1, "n ≥ 1"),
    "level.l": _check(_integer, lambda v: v >= 0, "l ≥ 0"),
    "level.delta_l": _number,
    "geometry.side": _positive,
    "geometry.spacing_factor": _positive,
    "drive.rabi_single": _non_negative,
    "drive.intensity": _non_negative,
    "drive.detuning": _number,
    "drive.purcell": _positive,
    "model.variant": _choice("eq8", "eq7"),
    "model.c3_source": _choice("formula", "observed"),
    "model.c3": _positive,
    "model.tau_max": _positive,
    "model.tau_points": _check(_integer, lambda v: v >= 2, "must be >= 2"),
    "model.freq_margin": _positive,
    "model.freq_step": _positive,
    "sweep.variable": _choice(*SWEEP_VARIABLES),
    "sweep.values": _number_list,
    "sweep.start": _number,
    "sweep.stop": _number,
    "sweep.num": _count,
    "sweep.workers": _count,
    "optimize.g2_max": _check(_number, lambda v: 0 < v <= 0.5, "g2_max must lie in (0, 0.5]"),
    "optimize.rabi_min": _non_negative,
    "optimize.rabi_max": _non_negative,
    "optimize.side_min": _positive,
    "optimize.side_max": _positive,
    "optimize.rabi_points": _count,
    "optimize.side_points": _count,
    "output.format": _choice("csv", "json"),
    "output.path": str,
}


def _strip_comment(line):
    return line.split("#", 1)[0].strip()


def _parse_assignment(text, where):
    if "=" not in text:
        raise ConfigError(f"expected 'section.key = value', got {text!r}", where)
    key, value = (s.strip() for s in text.split("=", 1))
    if key not in SCHEMA:
        section = key.split(".", 1)[0]
        if section not in SECTIONS:
            raise ConfigError(f"unknown section {section!r} in key {key!r}", where)
        raise ConfigError(f"unknown key {key!r}", where)
    try:
        return key, SCHEMA[key](value)
    except ValueError as exc:
        raise ConfigError(f"{key}: {exc}", where) from None


def parse_config(text: str = "", overrides=()) -> Config:
    """Parse config text plus ``section.key=value`` overrides into a Config."""
    values, lines = {}, {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        body = _strip_comment(raw)
        if not body:
            continue
        key, value = _parse_assignment(body, lineno)
        values[key], lines[key] = value, lineno
    for item in overrides:
        key, value = _parse_assignment(item, "--set")
        values[key], lines[key] = value, "--set"
    return _build(values, lines)


def load_config(path, overrides=()) -> Config:
    if path is None:
        return parse_config("", overrides)
    with open(path, encoding="utf-8") as fh:
        return parse_config(fh.read(), overrides)


def _section(values, name):
    prefix = name + "."
    return {k[len(prefix):]: v for k, v in values.items() if k.startswith(prefix)}


def _make(cls, kwargs, lines, section, base=None):
    try:
        return cls(**kwargs) if base is None else dataclasses.replace(base, **kwargs)
    except ValueError as exc:
        where = next((lines[f"{section}.{k}"] for k in reversed(list(kwargs)) if f"{section}.{k}" in lines), None)
        raise ConfigError(str(exc), where) from None


def _build(values, lines) -> Config:
    default = Config()
    mat = _make(MaterialConstants, _section(values, "material"), lines, "material")

    level_kw = _section(values, "level")
    l_value = level_kw.get("l", 1)
    if "delta_l" not in level_kw:
        if l_value != 1:
            raise ConfigError("level.delta_l is required when l != 1 (only the P defect is tabulated)",
                              lines.get("level.l"))
        level_kw["delta_l"] = mat.defect_p
    level = _make(ExcitonLevel, level_kw, lines, "level", default.level)

    geometry = _make(CrystalGeometry, _section(values, "geometry"), lines, "geometry", default.geometry)

    drive_kw = _section(values, "drive")
    if "intensity" in drive_kw:
        if "rabi_single" in drive_kw:
            raise ConfigError("set either drive.rabi_single or drive.intensity, not both", lines["drive.intensity"])
        drive_kw["rabi_single"] = rabi_from_intensity(drive_kw.pop("intensity"), level.n)
        lines["drive.rabi_single"] = lines["drive.intensity"]
    drive = _make(DriveConfig, drive_kw, lines, "drive", default.drive)

    model = _make(ModelConfig, _section(values, "model"), lines, "model")

    sweep_kw = _section(values, "sweep")
    span = {k: sweep_kw.pop(k) for k in ("start", "stop", "num") if k in sweep_kw}
    if span:
        if "values" in sweep_kw:
            raise ConfigError("give sweep.values or sweep.start/stop/num, not both", lines["sweep.values"])
        missing = {"start", "stop", "num"} - set(span)
        if missing:
            raise ConfigError(f"sweep range needs start, stop and num (missing {', '.join(sorted(missing))})",
                              next(lines[f"sweep.{k}"] for k in span))
        sweep_kw["values"] = tuple(float(v) for v in np.linspace(span["start"], span["stop"], span["num"]))
    if "values" in sweep_kw:
        vals = np.asarray(sweep_kw["values"])
        if np.any(np.diff(vals) <= 0):
            raise ConfigError("sweep values must be strictly ascending",
                              lines.get("sweep.values") or lines.get("sweep.start"))
    sweep = _make(SweepConfig, sweep_kw, lines, "sweep")

    opt = _make(OptimizeConfig, _section(values, "optimize"), lines, "optimize")
    for lo, hi in (("rabi_min", "rabi_max"), ("side_min", "side_max")):
        if getattr(opt, lo) > getattr(opt, hi):
            raise ConfigError(f"optimize.{lo} must not exceed optimize.{hi}",
                              lines.get(f"optimize.{lo}") or lines.get(f"optimize.{hi}"))

    output = _make(OutputConfig, _section(values, "output"), lines, "output")
    return Config(mat, level, geometry, drive, model, sweep, opt, output)


def config_to_dict(cfg: Config) -> dict:
    """Nested plain-dict view, in section order, for JSON output."""
    out = {}
    for name in SECTIONS:
        section = dataclasses.asdict(getattr(cfg, name))
        if name == "sweep":
            section["values"] = list(section["values"])
        out[name] = section
    return out
