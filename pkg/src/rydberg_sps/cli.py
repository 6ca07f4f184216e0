"""Command-line interface.

Exit codes: 0 success, 1 configuration error, 2 numerical failure,
3 infeasible optimisation.
"""

from __future__ import annotations

import argparse
import math
import sys

import numpy as np

from . import blockade, emitter, exciton, lindblad
from .config import ConfigError, load_config
from .sweep import (
    SWEEP_COLUMNS,
    InfeasibleError,
    SweepSpec,
    emit,
    operating_report,
    optimize_point,
    report_document,
    run_sweep,
)

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC, EXIT_INFEASIBLE = 0, 1, 2, 3


def _emitter_params(cfg) -> emitter.EmitterParams:
    _, n_sites = exciton.site_lattice(cfg.geometry, cfg.level, cfg.material)
    return emitter.EmitterParams(
        omega_c=exciton.collective_rabi(cfg.drive.rabi_single, n_sites),
        gamma=exciton.radiative_linewidth(cfg.level.n, cfg.material, cfg.drive.purcell),
        detuning=cfg.drive.detuning,
    )


def _write(text, cfg, out):
    if cfg.output.path is None:
        out.write(text)


def cmd_props(cfg, args, out):
    mat, level = cfg.material, cfg.level
    positions, n_sites = exciton.site_lattice(cfg.geometry, level, mat)
    gamma = exciton.radiative_linewidth(level.n, mat, cfg.drive.purcell)
    c3 = blockade.resolve_c3(level, mat, cfg.model.c3, cfg.model.c3_source)
    omega_c = exciton.collective_rabi(cfg.drive.rabi_single, n_sites)
    props = {
        "n": level.n,
        "l": level.l,
        "delta_l": level.delta_l,
        "mean_radius_um": exciton.mean_radius(level, mat),
        "energy_eV": exciton.rydberg_energy(level, mat),
        "linewidth_natural_GHz": exciton.radiative_linewidth(level.n, mat),
        "linewidth_GHz": gamma,
        "blockade_volume_um3": exciton.blockade_volume(level.n, mat),
        "c3_GHz_um3": c3,
        "N": n_sites,
        "omega_collective_GHz": omega_c,
        "ratio": omega_c / gamma,
        "blockade_radius_strong_um": exciton.blockade_radius_strong(omega_c, c3) if omega_c > 0 else math.nan,
    }
    for key, value in props.items():
        out.write(f"{key:<28}{value:.6g}\n" if isinstance(value, float) else f"{key:<28}{value}\n")
    if args.scaling:
        rows = []
        for n in args.scaling:
            lv = exciton.ExcitonLevel(n=n, l=level.l, delta_l=level.delta_l)
            r = exciton.mean_radius(lv, mat)
            vb = exciton.blockade_volume(n, mat)
            g = exciton.radiative_linewidth(n, mat, cfg.drive.purcell)
            rabi = exciton.rabi_from_intensity(exciton.REFERENCE_INTENSITY, n)
            # collective drive when the crystal fills the blockade volume
            omega_c = math.sqrt(vb / r**3) * rabi
            rows.append(
                {
                    "n": n,
                    "mean_radius_um": r,
                    "blockade_volume_um3": vb,
                    "volume_over_radius_cubed": vb / r**3,
                    "gamma_GHz": g,
                    "rabi_single_GHz": rabi,
                    "ratio_blockade_filled": omega_c / g,
                }
            )
        out.write("\n")
        out.write(emit(rows, "csv"))
    if cfg.output.path is not None:
        emit({"inputs": {"n": level.n, "l": level.l}, "derived": props}, cfg.output.format, cfg.output.path)


def cmd_steady(cfg, args, out):
    p = _emitter_params(cfg)
    rho = lindblad.steady_state(emitter.two_level_model(p))
    derived = {
        "omega_collective_GHz": p.omega_c,
        "gamma_GHz": p.gamma,
        "detuning_GHz": p.detuning,
        "ratio": p.ratio,
        "rho_ee_closed_form": emitter.steady_population(p),
        "rho_ee_engine": float(rho[1, 1].real),
        "fwhm_GHz": emitter.fwhm(p),
        "rate_GHz": emitter.photon_rate(p),
    }
    for key, value in derived.items():
        out.write(f"{key:<22}{value:.10g}\n")
    if cfg.output.path is not None:
        emit({"inputs": {"omega_single_GHz": cfg.drive.rabi_single}, "derived": derived}, cfg.output.format, cfg.output.path)


def cmd_g2(cfg, args, out):
    p = _emitter_params(cfg)
    tau = np.linspace(0.0, cfg.model.tau_max / p.gamma, cfg.model.tau_points)
    numeric = emitter.g2_numeric(p, tau).values
    closed = emitter.g2_closed_form(p, tau).values if p.detuning == 0 else np.full(tau.size, math.nan)
    rows = [
        {"tau_ns": float(t), "g2_numeric": float(a), "g2_closed_form": float(b)}
        for t, a, b in zip(tau, numeric, closed)
    ]
    _write(emit(rows, cfg.output.format, cfg.output.path), cfg, out)


def cmd_spectrum(cfg, args, out):
    p = _emitter_params(cfg)
    half = p.omega_c + abs(p.detuning) + cfg.model.freq_margin * p.gamma
    step = cfg.model.freq_step * p.gamma
    freq = np.arange(-half, half + 0.5 * step, step)
    spec = emitter.emission_spectrum(p, freq)
    rows = [{"freq_GHz": float(f), "incoherent_density": float(s)} for f, s in zip(spec.freq_grid, spec.incoherent_density)]
    _write(emit(rows, cfg.output.format, cfg.output.path), cfg, out)
    err = sys.stderr
    err.write(f"coherent weight {spec.coherent_weight:.6g}, incoherent power {spec.incoherent_power:.6g}\n")
    for pk in spec.peaks:
        err.write(f"peak at {pk.center:+.4f} GHz, FWHM {pk.fwhm:.4f} GHz ({pk.fwhm / p.gamma:.3f} gamma)\n")


def cmd_blockade(cfg, args, out):
    res = blockade.blockade_report(
        cfg.geometry, cfg.level, cfg.drive, cfg.material,
        variant=cfg.model.variant, c3=cfg.model.c3, c3_source=cfg.model.c3_source,
    )
    out.write(
        f"N={res.n_sites}  Omega'={res.collective_rabi:.6g} GHz  Gamma={res.gamma:.6g} GHz  "
        f"rho_ee={res.rho_ee:.6g}\nP_rr={res.p_rr:.6g}  g2(0)={res.g2_zero:.6g}  rate={res.rate:.6g} GHz  "
        f"({cfg.model.variant}, {len(res.pair_rho2)} pairs)\n"
    )
    if cfg.output.path is not None:
        rows = [
            {"site_i": t.site_i, "site_j": t.site_j, "distance_um": t.distance, "v_ij_GHz": t.v_ij, "rho2": t.rho2}
            for t in res.pair_terms
        ]
        emit(rows, cfg.output.format, cfg.output.path, columns=["site_i", "site_j", "distance_um", "v_ij_GHz", "rho2"])


def cmd_sweep(cfg, args, out):
    rows = run_sweep(SweepSpec.from_config(cfg))
    _write(emit(rows, cfg.output.format, cfg.output.path, columns=list(SWEEP_COLUMNS)), cfg, out)


def cmd_report(cfg, args, out):
    pt, summary = operating_report(cfg)
    out.write(summary + "\n")
    if cfg.output.path is not None:
        emit(report_document(pt), cfg.output.format, cfg.output.path)


def cmd_optimize(cfg, args, out):
    pt = optimize_point(cfg)
    _, summary = operating_report(pt.config)
    out.write(f"best grid point for g2(0) <= {cfg.optimize.g2_max:g}:\n{summary}\n")
    if cfg.output.path is not None:
        emit(report_document(pt), cfg.output.format, cfg.output.path)


COMMANDS = {
    "props": (cmd_props, "static exciton and lattice quantities"),
    "steady": (cmd_steady, "steady-state population, linewidth and photon rate"),
    "g2": (cmd_g2, "second-order correlation g2(tau), closed form and numeric"),
    "spectrum": (cmd_spectrum, "resonance-fluorescence spectrum and Mollow peaks"),
    "blockade": (cmd_blockade, "double-excitation probability and g2(0)"),
    "sweep": (cmd_sweep, "sweep one parameter and tabulate the operating point"),
    "report": (cmd_report, "operating-point report with published-value comparison"),
    "optimize": (cmd_optimize, "grid search for the highest rate under a g2(0) bound"),
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("-c", "--config", help="config file (section.key = value lines)")
    common.add_argument("--set", action="append", default=[], metavar="SECTION.KEY=VALUE",
                        help="override one config key; repeatable")
    common.add_argument("-o", "--output", help="write data to this path (same as output.path)")
    common.add_argument("--format", choices=("csv", "json"), help="output format (same as output.format)")

    parser = argparse.ArgumentParser(prog="rydberg-sps", description="Rydberg-exciton blockade single-photon source")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, (_, help_text) in COMMANDS.items():
        p = sub.add_parser(name, parents=[common], help=help_text, description=help_text)
        if name == "props":
            p.add_argument("--scaling", type=int, nargs="+", metavar="N",
                           help="also tabulate scaling quantities for these principal numbers")
    return parser


def main(argv=None, out=None) -> int:
    out = out or sys.stdout
    args = build_parser().parse_args(argv)
    overrides = list(args.set)
    if args.output is not None:
        overrides.append(f"output.path = {args.output}")
    if args.format is not None:
        overrides.append(f"output.format = {args.format}")
    try:
        cfg = load_config(args.config, overrides)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    handler = COMMANDS[args.command][0]
    try:
        handler(cfg, args, out)
    except InfeasibleError as exc:
        print(f"infeasible: {exc} (binding constraint: {exc.constraint})", file=sys.stderr)
        return EXIT_INFEASIBLE
    except (lindblad.EngineError, ValueError, ArithmeticError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except OSError as exc:
        print(f"output error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
