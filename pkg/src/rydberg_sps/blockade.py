"""Imperfect blockade: probability of two simultaneous excitons.

Each pair of lattice sites (i, j) is treated on its own.  Its doubly
excited state is shifted by ``V_ij = C3 / r_ij**3`` and is reached from the
collective single-exciton state with coupling ``omega / (2 sqrt(N))``.
Three estimates of the pair's double-excitation probability are available:

``eq8``
    The factorised closed form ``X/(1+2X) * Y/(1+2Y)`` with
    ``X = N omega**2 / gamma**2`` and
    ``Y = (omega**2 / N) / (V**2 + gamma**2 / 4)``.
``eq7``
    The exact stationary solution of the pair's two-level equations
    (upper level decaying at ``gamma``, coherence at ``gamma / 2``), fed
    with the single-exciton population ``X/(1+2X)``:
    ``rho11 * (Y/4) / (1 + Y/4)``.
``ladder_oracle``
    Brute-force steady state of the 0-1-2 ladder with the Lindblad engine.

For small Y, ``eq8`` is about four times ``eq7``.  Both are kept so the
gap can be measured.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.spatial.distance import pdist

from . import exciton, lindblad
from .emitter import EmitterParams, steady_population
from .exciton import CrystalGeometry, DriveConfig, ExcitonLevel, MaterialConstants

VARIANTS = ("eq8", "eq7")


def pair_interaction(distance, c3):
    """Dipole-dipole shift C3 / r**3 in GHz; works elementwise on arrays."""
    r = np.asarray(distance, dtype=float)
    if np.any(r <= 0):
        raise ValueError("pair distance must be > 0")
    v = c3 / r**3
    return float(v) if v.ndim == 0 else v


def _xy(omega_single, n_sites, gamma, v_ij):
    if gamma <= 0:
        raise ValueError(f"gamma must be > 0, got {gamma!r}")
    x = n_sites * omega_single**2 / gamma**2
    y = (omega_single**2 / n_sites) / (np.square(v_ij) + gamma**2 / 4)
    return x, y


def pair_double_excitation_eq8(omega_single, n_sites, gamma, v_ij):
    x, y = _xy(omega_single, n_sites, gamma, v_ij)
    return x / (1 + 2 * x) * (y / (1 + 2 * y))


def pair_double_excitation_eq7(omega_single, n_sites, gamma, v_ij):
    x, y = _xy(omega_single, n_sites, gamma, v_ij)
    q = y / 4
    return x / (1 + 2 * x) * (q / (1 + q))


PAIR_FORMULAS = {
    "eq8": pair_double_excitation_eq8,
    "eq7": pair_double_excitation_eq7,
}


def ladder_model(omega_single, n_sites, gamma, v_ij) -> lindblad.LindbladModel:
    """Ground, collective single exciton and pair-doubly-excited state."""
    g01 = 0.5 * math.sqrt(n_sites) * omega_single
    g12 = 0.5 * omega_single / math.sqrt(n_sites)
    h = np.array(
        [
            [0.0, g01, 0.0],
            [g01, 0.0, g12],
            [0.0, g12, v_ij],
        ],
        dtype=complex,
    )
    jumps = [
        (lindblad.transition(3, 0, 1), gamma),
        (lindblad.transition(3, 1, 2), gamma),
    ]
    return lindblad.LindbladModel(h, jumps)


def ladder_oracle(omega_single, n_sites, gamma, v_ij) -> float:
    if gamma <= 0:
        raise ValueError(f"gamma must be > 0, got {gamma!r}")
    rho = lindblad.steady_state(ladder_model(omega_single, n_sites, gamma, v_ij))
    return float(rho[2, 2].real)


@dataclass(frozen=True)
class PairTerm:
    site_i: int
    site_j: int
    distance: float  # um
    v_ij: float  # GHz
    rho2: float


@dataclass(frozen=True)
class BlockadeResult:
    n_sites: int
    collective_rabi: float  # GHz
    gamma: float  # GHz
    rho_ee: float
    p_rr: float
    g2_zero: float
    rate: float  # GHz
    positions: np.ndarray
    pair_index: np.ndarray  # (P, 2), sorted lexicographically
    pair_distance: np.ndarray
    pair_shift: np.ndarray
    pair_rho2: np.ndarray

    @property
    def ratio(self) -> float:
        return self.collective_rabi / self.gamma

    @property
    def pair_terms(self) -> list[PairTerm]:
        return [
            PairTerm(int(i), int(j), float(r), float(v), float(p))
            for (i, j), r, v, p in zip(self.pair_index, self.pair_distance, self.pair_shift, self.pair_rho2)
        ]


def pair_indices(n_sites: int) -> np.ndarray:
    """All (i, j) with i < j, in the same order as ``scipy.spatial.distance.pdist``."""
    i, j = np.triu_indices(n_sites, k=1)
    return np.stack([i, j], axis=1)


def resolve_c3(level: ExcitonLevel, mat: MaterialConstants, c3=None, c3_source="formula") -> float:
    return float(c3) if c3 is not None else exciton.c3_coefficient(level.n, mat, c3_source)


def blockade_report(
    geom: CrystalGeometry,
    level: ExcitonLevel,
    drive: DriveConfig,
    mat: MaterialConstants = MaterialConstants(),
    variant: str = "eq8",
    c3: float | None = None,
    c3_source: str = "formula",
) -> BlockadeResult:
    """Double-excitation probability and g2(0) of a resonantly driven crystal.

    ``c3`` overrides the calibrated coefficient when given.  A crystal that
    holds a single site is perfectly blockaded: P_rr = g2(0) = 0.  When the
    drive is off g2(0) is NaN.
    """
    if variant not in PAIR_FORMULAS:
        raise ValueError(f"unknown variant {variant!r}; expected one of {VARIANTS}")
    if drive.detuning != 0:
        raise ValueError("the blockade model is defined for resonant drive only (detuning = 0)")
    positions, n_sites = exciton.site_lattice(geom, level, mat)
    gamma = exciton.radiative_linewidth(level.n, mat, drive.purcell)
    omega_c = exciton.collective_rabi(drive.rabi_single, n_sites)
    rho_ee = steady_population(EmitterParams(omega_c, gamma))

    index = pair_indices(n_sites)
    if n_sites > 1:
        dist = pdist(positions)
        shift = pair_interaction(dist, resolve_c3(level, mat, c3, c3_source))
        rho2 = np.asarray(PAIR_FORMULAS[variant](drive.rabi_single, n_sites, gamma, shift), dtype=float)
    else:
        dist = shift = rho2 = np.zeros(0)
    p_rr = math.fsum(rho2)
    g2 = 0.5 * p_rr / rho_ee if rho_ee > 0 else math.nan
    return BlockadeResult(
        n_sites=n_sites,
        collective_rabi=omega_c,
        gamma=gamma,
        rho_ee=rho_ee,
        p_rr=p_rr,
        g2_zero=g2,
        rate=rho_ee * gamma,
        positions=positions,
        pair_index=index,
        pair_distance=dist,
        pair_shift=shift,
        pair_rho2=rho2,
    )
