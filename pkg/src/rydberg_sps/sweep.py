"""Parameter sweeps, the operating-point report and a grid-search optimiser."""

from __future__ import annotations

import csv
import io
import json
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import exciton
from .blockade import blockade_report, resolve_c3
from .config import SWEEP_VARIABLES, Config, config_to_dict

SWEEP_COLUMNS = (
    "sweep_value",
    "N",
    "omega_collective_GHz",
    "ratio",
    "rho_ee",
    "rate_GHz",
    "P_rr",
    "g2_zero",
    "error",
)

# Reference values for the n=24, 4 um, Purcell-2 operating point.
PUBLISHED_RATE_GHZ = 2.0
PUBLISHED_RATIO = 6.0
PUBLISHED_G2_ZERO = 0.007


class InfeasibleError(RuntimeError):
    def __init__(self, message, constraint):
        super().__init__(message)
        self.constraint = constraint


@dataclass(frozen=True)
class SweepSpec:
    variable: str
    values: tuple
    fixed: Config

    def __post_init__(self):
        if self.variable not in SWEEP_VARIABLES:
            raise ValueError(f"unknown sweep variable {self.variable!r}; expected one of {SWEEP_VARIABLES}")
        vals = np.asarray(self.values, dtype=float)
        if vals.size == 0:
            raise ValueError("sweep values must be non-empty")
        if np.any(np.diff(vals) <= 0):
            raise ValueError("sweep values must be strictly ascending")
        object.__setattr__(self, "values", tuple(float(v) for v in vals))

    @classmethod
    def from_config(cls, cfg: Config) -> SweepSpec:
        return cls(cfg.sweep.variable, cfg.sweep.values, cfg)


def apply_sweep_value(cfg: Config, variable: str, value: float) -> Config:
    """Config with one sweep coordinate set.

    ``drive_ratio`` fixes Omega'/Gamma and back-solves the single-site Rabi
    frequency for the current lattice and Purcell factor.
    """
    if variable == "side":
        return cfg.with_values(geometry__side=value)
    if variable == "n":
        if value != int(value):
            raise ValueError(f"principal quantum number must be an integer, got {value!r}")
        return cfg.with_values(level__n=int(value))
    if variable == "drive_ratio":
        if value < 0:
            raise ValueError(f"drive ratio must be >= 0, got {value!r}")
        _, n_sites = exciton.site_lattice(cfg.geometry, cfg.level, cfg.material)
        gamma = exciton.radiative_linewidth(cfg.level.n, cfg.material, cfg.drive.purcell)
        return cfg.with_values(drive__rabi_single=value * gamma / math.sqrt(n_sites))
    raise ValueError(f"unknown sweep variable {variable!r}")


@dataclass(frozen=True)
class OperatingPoint:
    """Inputs of one operating point and everything derived from them."""

    omega_single: float  # GHz
    side: float  # um
    n: int
    purcell: float
    n_sites: int
    ratio: float
    rho_ee: float
    rate: float  # GHz
    p_rr: float
    g2_zero: float
    omega_collective: float  # GHz
    gamma: float  # GHz
    config: Config

    @classmethod
    def from_config(cls, cfg: Config) -> OperatingPoint:
        res = blockade_report(
            cfg.geometry,
            cfg.level,
            cfg.drive,
            cfg.material,
            variant=cfg.model.variant,
            c3=cfg.model.c3,
            c3_source=cfg.model.c3_source,
        )
        return cls(
            omega_single=cfg.drive.rabi_single,
            side=cfg.geometry.side,
            n=cfg.level.n,
            purcell=cfg.drive.purcell,
            n_sites=res.n_sites,
            ratio=res.ratio,
            rho_ee=res.rho_ee,
            rate=res.rate,
            p_rr=res.p_rr,
            g2_zero=res.g2_zero,
            omega_collective=res.collective_rabi,
            gamma=res.gamma,
            config=cfg,
        )

    def recompute(self) -> OperatingPoint:
        return OperatingPoint.from_config(self.config)

    def inputs(self) -> dict:
        return {"omega_single_GHz": self.omega_single, "side_um": self.side, "n": self.n, "purcell": self.purcell}

    def derived(self) -> dict:
        return {
            "N": self.n_sites,
            "omega_collective_GHz": self.omega_collective,
            "gamma_GHz": self.gamma,
            "ratio": self.ratio,
            "rho_ee": self.rho_ee,
            "rate_GHz": self.rate,
            "P_rr": self.p_rr,
            "g2_zero": self.g2_zero,
        }


def _row(value, cfg: Config) -> dict:
    row = dict.fromkeys(SWEEP_COLUMNS)
    row["sweep_value"] = value
    try:
        pt = OperatingPoint.from_config(cfg)
    except (ValueError, ArithmeticError) as exc:
        row["error"] = str(exc)
        return row
    row.update(
        N=pt.n_sites,
        omega_collective_GHz=pt.omega_collective,
        ratio=pt.ratio,
        rho_ee=pt.rho_ee,
        rate_GHz=pt.rate,
        P_rr=pt.p_rr,
        g2_zero=pt.g2_zero,
        error="",
    )
    return row


def _sweep_point(spec: SweepSpec, value: float) -> dict:
    try:
        cfg = apply_sweep_value(spec.fixed, spec.variable, value)
    except ValueError as exc:
        row = dict.fromkeys(SWEEP_COLUMNS)
        row.update(sweep_value=value, error=str(exc))
        return row
    return _row(value, cfg)


def run_sweep(spec: SweepSpec, workers: int | None = None) -> list[dict]:
    """One row per sweep value, in input order; failures land in ``error``."""
    workers = spec.fixed.sweep.workers if workers is None else workers
    if workers <= 1:
        return [_sweep_point(spec, v) for v in spec.values]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(lambda v: _sweep_point(spec, v), spec.values))


def sensitivity_table(cfg: Config) -> list[dict]:
    """g2(0) at one operating point for both pair formulas and both C3 calibrations."""
    rows = []
    for variant in ("eq8", "eq7"):
        for source in ("formula", "observed"):
            c3 = resolve_c3(cfg.level, cfg.material, None, source)
            pt = OperatingPoint.from_config(cfg.with_values(model__variant=variant, model__c3_source=source, model__c3=None))
            rows.append(
                {
                    "variant": variant,
                    "c3_source": source,
                    "c3_GHz_um3": c3,
                    "P_rr": pt.p_rr,
                    "g2_zero": pt.g2_zero,
                }
            )
    return rows


def _deviation(achieved, target):
    return (achieved - target) / target


def operating_report(cfg: Config) -> tuple[OperatingPoint, str]:
    """Derived quantities at the configured point plus a printable summary."""
    pt = OperatingPoint.from_config(cfg)
    c3 = resolve_c3(cfg.level, cfg.material, cfg.model.c3, cfg.model.c3_source)
    c3_label = "override" if cfg.model.c3 is not None else cfg.model.c3_source
    lines = [
        f"operating point: n={pt.n}, side={pt.side:g} um, Omega={pt.omega_single:g} GHz, Purcell={pt.purcell:g}",
        f"  sites N                 {pt.n_sites}",
        f"  Omega' (collective)     {pt.omega_collective:.4f} GHz",
        f"  Gamma (Purcell-scaled)  {pt.gamma:.4f} GHz",
        f"  C3                      {c3:.4f} GHz um^3 ({c3_label})",
        f"  rho_ee                  {pt.rho_ee:.6f}",
        f"  P_rr ({cfg.model.variant})             {pt.p_rr:.6g}",
        "",
        "comparison with published values:",
        f"  Omega'/Gamma  achieved {pt.ratio:.4f}  target {PUBLISHED_RATIO:g}  "
        f"deviation {_deviation(pt.ratio, PUBLISHED_RATIO):+.2%}",
        f"  rate          achieved {pt.rate:.4f} GHz  target {PUBLISHED_RATE_GHZ:g} GHz  "
        f"deviation {_deviation(pt.rate, PUBLISHED_RATE_GHZ):+.2%}",
    ]
    if math.isnan(pt.g2_zero):
        lines.append(f"  g2(0)         undefined (no drive)  target {PUBLISHED_G2_ZERO:g}")
    else:
        lines.append(
            f"  g2(0)         achieved {pt.g2_zero:.6g}  target {PUBLISHED_G2_ZERO:g}  "
            f"deviation {_deviation(pt.g2_zero, PUBLISHED_G2_ZERO):+.2%}"
        )
    if pt.omega_single > 0:
        lines += ["", "g2(0) sensitivity (pair formula x C3 calibration):"]
        lines.append(f"  {'variant':<8}{'c3_source':<11}{'C3 [GHz um^3]':>15}{'P_rr':>14}{'g2(0)':>14}")
        for row in sensitivity_table(cfg):
            lines.append(
                f"  {row['variant']:<8}{row['c3_source']:<11}{row['c3_GHz_um3']:>15.4f}"
                f"{row['P_rr']:>14.6g}{row['g2_zero']:>14.6g}"
            )
    return pt, "\n".join(lines)


def report_document(pt: OperatingPoint) -> dict:
    doc = {"inputs": pt.inputs(), "derived": pt.derived()}
    if pt.omega_single > 0:
        doc["sensitivity"] = sensitivity_table(pt.config)
    doc["config"] = config_to_dict(pt.config)
    return doc


def optimize_point(cfg: Config, g2_max=None, rabi_bounds=None, side_bounds=None, points=None) -> OperatingPoint:
    """Highest photon rate on a (Rabi frequency, crystal side) grid.

    Feasible cells have g2(0) <= ``g2_max`` and a side of at least two
    lattice pitches.  Ties go to the smaller Rabi frequency, then the
    smaller side.  Raises :class:`InfeasibleError` naming the binding
    constraint when nothing is feasible.
    """
    opt = cfg.optimize
    g2_max = opt.g2_max if g2_max is None else g2_max
    if not 0 < g2_max <= 0.5:
        raise ValueError(f"g2_max must lie in (0, 0.5], got {g2_max!r}")
    rabi_lo, rabi_hi = rabi_bounds or (opt.rabi_min, opt.rabi_max)
    side_lo, side_hi = side_bounds or (opt.side_min, opt.side_max)
    n_rabi, n_side = points or (opt.rabi_points, opt.side_points)
    if rabi_lo > rabi_hi or side_lo > side_hi or min(n_rabi, n_side) < 1:
        raise ValueError("optimizer bounds must be non-empty")
    rabi_grid = np.linspace(rabi_lo, rabi_hi, n_rabi)
    side_grid = np.linspace(side_lo, side_hi, n_side)

    min_side = 2 * cfg.geometry.spacing_factor * exciton.mean_radius(cfg.level, cfg.material)
    sides = [float(s) for s in side_grid if s >= min_side]
    if not sides:
        raise InfeasibleError(
            f"no crystal side in [{side_lo:g}, {side_hi:g}] um reaches the minimum {min_side:.4f} um",
            "side >= 2 * spacing_factor * <r_n>",
        )

    best = None
    for rabi in (float(r) for r in rabi_grid):
        for side in sides:
            pt = OperatingPoint.from_config(cfg.with_values(drive__rabi_single=rabi, geometry__side=side))
            if math.isnan(pt.g2_zero) or pt.g2_zero > g2_max:
                continue
            if best is None or pt.rate > best.rate:
                best = pt
    if best is None:
        raise InfeasibleError(f"no grid point satisfies g2(0) <= {g2_max:g}", "g2(0) <= g2_max")
    return best


def _format_cell(value):
    if value is None:
        return ""
    if isinstance(value, bool):
        return str(value).lower()
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return str(value)


def _json_value(value):
    if isinstance(value, dict):
        return {k: _json_value(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_json_value(v) for v in value]
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        value = float(value)
        return None if not math.isfinite(value) else value
    return value


def to_csv(rows, columns=None) -> str:
    """RFC-4180 CSV text (CRLF line ends, header first)."""
    if columns is None:
        columns = list(rows[0]) if rows else list(SWEEP_COLUMNS)
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\r\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([_format_cell(row.get(c)) for c in columns])
    return buf.getvalue()


def to_json(obj) -> str:
    return json.dumps(_json_value(obj), indent=2, ensure_ascii=False, allow_nan=False) + "\n"


def emit(data, fmt: str, path=None, columns=None) -> str:
    """Serialise a table (list of row dicts) or a report dict; write it if ``path`` is given."""
    if fmt == "csv":
        if isinstance(data, dict):
            # only the flat scalar sections of a report fit the three-column layout
            rows = [
                {"section": sec, "key": k, "value": v}
                for sec in ("inputs", "derived")
                for k, v in data.get(sec, {}).items()
            ]
            text = to_csv(rows, ["section", "key", "value"])
        else:
            text = to_csv(data, columns)
    elif fmt == "json":
        if columns is not None and not isinstance(data, dict):
            data = [{c: row.get(c) for c in columns} for row in data]
        text = to_json(data)
    else:
        raise ValueError(f"unknown output format {fmt!r}")
    if path is not None:
        try:
            with open(path, "w", encoding="utf-8", newline="") as fh:
                fh.write(text)
        except OSError as exc:
            raise OSError(f"cannot write {os.fspath(path)}: {exc.strerror or exc}") from exc
    return text


__all__ = [
    "InfeasibleError",
    "OperatingPoint",
    "SWEEP_COLUMNS",
    "SweepSpec",
    "apply_sweep_value",
    "emit",
    "operating_report",
    "optimize_point",
    "report_document",
    "run_sweep",
    "sensitivity_table",
    "to_csv",
    "to_json",
]
