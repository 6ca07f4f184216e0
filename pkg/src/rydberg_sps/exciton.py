"""
Static properties of yellow P Rydberg excitons in cuprous oxide.

Everything here is a pure function of an :class:`ExcitonLevel`, the
:class:`MaterialConstants` and (for lattice quantities) a
:class:`CrystalGeometry`.

Units
-----
Lengths are in micrometres, volumes in cubic micrometres, energies in eV
and every rate or frequency (Rabi frequencies, linewidths, interaction
shifts) in GHz.  Only ratios of rates enter the dynamics, so no factor of
2*pi is ever inserted.  Material constants keep the units they are usually
quoted in (nm, meV, THz) and are converted on the way out.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

NM_PER_UM = 1.0e3
MEV_PER_EV = 1.0e3
GHZ_PER_THZ = 1.0e3

# Calibration point for the intensity -> Rabi frequency law.
REFERENCE_INTENSITY = 4.0  # uW/mm^2
REFERENCE_RABI = 9.0  # GHz
REFERENCE_N = 24


@dataclass(frozen=True)
class MaterialConstants:
    """Cu2O yellow-series constants.

    ``observed_blockade_volume`` is the measured n=24 blockade volume
    (um^3); it is only used when C3 is calibrated with
    ``c3_source="observed"``.
    """

    bohr_radius: float = 1.1  # nm
    rydberg_energy: float = 92.0  # meV
    bandgap: float = 2.17208  # eV
    defect_p: float = 0.23
    linewidth_coeff: float = 28.0  # THz, Gamma(n) = coeff * n**-3
    blockade_coeff: float = 3.0e-7  # um^3, V_B = coeff * n**7
    dielectric: float = 7.5
    observed_blockade_volume: float = 2000.0  # um^3 at n=24

    def __post_init__(self):
        for name, value in vars(self).items():
            if not value > 0:
                raise ValueError(f"material constant {name} must be > 0, got {value!r}")


@dataclass(frozen=True)
class ExcitonLevel:
    n: int = 24
    l: int = 1
    delta_l: float = 0.23

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 1:
            raise ValueError(f"n >= 1 required, got {self.n!r}")
        if int(self.l) != self.l or not 0 <= self.l <= self.n - 1:
            raise ValueError(f"0 <= l <= n-1 required, got l={self.l!r} for n={self.n}")
        if not self.n - self.delta_l > 0:
            raise ValueError(f"n - delta_l must be > 0, got n={self.n}, delta_l={self.delta_l}")

    @classmethod
    def p_state(cls, n: int, mat: MaterialConstants | None = None) -> ExcitonLevel:
        mat = mat or MaterialConstants()
        return cls(n=n, l=1, delta_l=mat.defect_p)


@dataclass(frozen=True)
class CrystalGeometry:
    side: float = 4.0  # um, cube edge
    spacing_factor: float = 2.0  # site pitch in units of <r_n>

    def __post_init__(self):
        if not self.side > 0:
            raise ValueError(f"side must be > 0, got {self.side!r}")
        if not self.spacing_factor > 0:
            raise ValueError(f"spacing_factor must be > 0, got {self.spacing_factor!r}")


@dataclass(frozen=True)
class DriveConfig:
    rabi_single: float  # GHz, single-site
    detuning: float = 0.0  # GHz
    purcell: float = 1.0

    def __post_init__(self):
        if not self.rabi_single >= 0:
            raise ValueError(f"rabi_single must be >= 0, got {self.rabi_single!r}")
        if not self.purcell > 0:
            raise ValueError(f"purcell must be > 0, got {self.purcell!r}")


def mean_radius(level: ExcitonLevel, mat: MaterialConstants = MaterialConstants()) -> float:
    """Expectation value of the electron-hole separation, in um."""
    n, l = level.n, level.l
    return 0.5 * mat.bohr_radius * (3 * n * n - l * (l + 1)) / NM_PER_UM


def rydberg_energy(level: ExcitonLevel, mat: MaterialConstants = MaterialConstants()) -> float:
    """Exciton energy in eV, including the quantum defect."""
    return mat.bandgap - (mat.rydberg_energy / MEV_PER_EV) / (level.n - level.delta_l) ** 2


def radiative_linewidth(n: int, mat: MaterialConstants = MaterialConstants(), purcell: float = 1.0) -> float:
    """Purcell-scaled radiative decay rate in GHz."""
    if n < 1:
        raise ValueError(f"n >= 1 required, got {n!r}")
    return purcell * mat.linewidth_coeff * GHZ_PER_THZ * float(n) ** -3


def blockade_volume(n: int, mat: MaterialConstants = MaterialConstants()) -> float:
    """Weak-drive blockade volume in um^3."""
    if n < 1:
        raise ValueError(f"n >= 1 required, got {n!r}")
    return mat.blockade_coeff * float(n) ** 7


def observed_blockade_volume(n: int, mat: MaterialConstants = MaterialConstants()) -> float:
    """Measured n=24 blockade volume carried to other n with the n**7 law."""
    return mat.observed_blockade_volume * (n / REFERENCE_N) ** 7


def c3_coefficient(
    n: int,
    mat: MaterialConstants = MaterialConstants(),
    source: str = "formula",
) -> float:
    """Dipole-dipole coefficient C3 in GHz um^3.

    Obtained by inverting ``V_B = (4 pi / 3) C3 / (Gamma_n / 2)`` with the
    natural (Purcell factor 1) linewidth.  ``source`` selects the blockade
    volume: ``"formula"`` uses the n**7 law, ``"observed"`` the measured
    volume.
    """
    if source == "formula":
        vb = blockade_volume(n, mat)
    elif source == "observed":
        vb = observed_blockade_volume(n, mat)
    else:
        raise ValueError(f"unknown C3 source {source!r}; expected 'formula' or 'observed'")
    return 3.0 / (4.0 * math.pi) * vb * radiative_linewidth(n, mat) / 2.0


def site_lattice(
    geom: CrystalGeometry,
    level: ExcitonLevel,
    mat: MaterialConstants = MaterialConstants(),
) -> tuple[np.ndarray, int]:
    """Corner-anchored simple cubic lattice of exciton sites.

    The pitch is ``spacing_factor * <r_n>``; ``m = floor(side / pitch)``
    sites fit along each axis (at least one).  Returns the ``(N, 3)`` array
    of positions in um and ``N = m**3``.
    """
    pitch = geom.spacing_factor * mean_radius(level, mat)
    m = max(1, math.floor(geom.side / pitch))
    positions = np.array(list(itertools.product(range(m), repeat=3)), dtype=float) * pitch
    return positions, m**3


def collective_rabi(rabi_single: float, n_sites: int) -> float:
    if n_sites < 1:
        raise ValueError(f"N >= 1 required, got {n_sites!r}")
    return math.sqrt(n_sites) * rabi_single


def blockade_radius_strong(collective_rabi: float, c3: float) -> float:
    """Strong-drive blockade radius (C3 / Omega')**(1/3), in um."""
    if not collective_rabi > 0:
        raise ValueError("blockade radius is undefined for zero drive")
    return (c3 / collective_rabi) ** (1.0 / 3.0)


def rabi_from_intensity(intensity: float, n: int) -> float:
    """Single-site Rabi frequency (GHz) for a pump intensity in uW/mm^2.

    Field amplitude goes as sqrt(intensity) and the dipole matrix element
    as n**-1.5; anchored at 9 GHz for 4 uW/mm^2 on 24P.
    """
    if intensity < 0:
        raise ValueError(f"intensity must be >= 0, got {intensity!r}")
    return REFERENCE_RABI * math.sqrt(intensity / REFERENCE_INTENSITY) * (n / REFERENCE_N) ** -1.5
