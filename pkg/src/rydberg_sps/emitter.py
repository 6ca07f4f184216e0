"""Driven two-level emitter: populations, g2 and resonance fluorescence.

The blockaded crystal behaves as one two-level system driven with the
collective Rabi frequency ``omega_c`` and decaying at ``gamma``.  Closed
forms live next to engine-based counterparts so that each can check the
other.

Basis ordering is (ground, excited).  The Hamiltonian in the frame of the
pump is ``-detuning |e><e| + omega_c / 2 (|e><g| + |g><e|)``.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np
from scipy.optimize import OptimizeWarning, curve_fit
from scipy.signal import find_peaks, peak_widths

from . import lindblad
from .lindblad import LindbladModel

GROUND, EXCITED = 0, 1
SIGMA_MINUS = lindblad.transition(2, GROUND, EXCITED)
SIGMA_PLUS = SIGMA_MINUS.conj().T
EXCITED_PROJ = lindblad.projector(2, EXCITED)
GROUND_STATE = lindblad.projector(2, GROUND)

# g1 is integrated out to this many lifetimes; no taper is applied.
SPECTRUM_TAU_MAX = 30.0


class SpectrumResolutionError(ValueError):
    pass


@dataclass(frozen=True)
class EmitterParams:
    omega_c: float  # collective Rabi frequency, GHz
    gamma: float  # Purcell-scaled decay rate, GHz
    detuning: float = 0.0  # laser minus transition frequency, GHz

    def __post_init__(self):
        if not self.gamma > 0:
            raise ValueError(f"gamma must be > 0, got {self.gamma!r}")
        if not self.omega_c >= 0:
            raise ValueError(f"omega_c must be >= 0, got {self.omega_c!r}")

    @property
    def ratio(self) -> float:
        return self.omega_c / self.gamma


@dataclass(frozen=True)
class G2Curve:
    tau_grid: np.ndarray
    values: np.ndarray


class Peak(NamedTuple):
    center: float  # GHz offset from the transition frequency
    fwhm: float  # GHz, from a single-pole fit


@dataclass(frozen=True)
class SpectrumResult:
    freq_grid: np.ndarray
    incoherent_density: np.ndarray  # per GHz; integrates to the incoherent power
    coherent_weight: float  # |<sigma_minus>|^2, a delta at the laser frequency
    peaks: list = field(default_factory=list)

    @property
    def incoherent_power(self) -> float:
        return float(np.trapezoid(self.incoherent_density, self.freq_grid))


def two_level_model(p: EmitterParams) -> LindbladModel:
    h = -p.detuning * EXCITED_PROJ + 0.5 * p.omega_c * (SIGMA_PLUS + SIGMA_MINUS)
    return LindbladModel(h, [(SIGMA_MINUS, p.gamma)])


def steady_population(p: EmitterParams) -> float:
    """Stationary excited-state population (Lorentzian in the detuning)."""
    s = p.omega_c**2
    return (s / 4) / (p.detuning**2 + p.gamma**2 / 4 * (1 + 2 * s / p.gamma**2))


def fwhm(p: EmitterParams) -> float:
    """Power-broadened width of ``steady_population`` versus detuning."""
    return p.gamma * math.sqrt(1 + 2 * p.omega_c**2 / p.gamma**2)


def photon_rate(p: EmitterParams) -> float:
    return steady_population(p) * p.gamma


def g2_closed_form(p: EmitterParams, tau_grid) -> G2Curve:
    """Resonant g2(tau) of a single emitter started from the ground state.

    Underdamped drive (omega_c > gamma/4) oscillates at
    sqrt(omega_c**2 - gamma**2/16).  Below that threshold the same formula
    is continued to hyperbolic functions, and exactly at threshold its
    limit is used.  The detuning of ``p`` is ignored.
    """
    tau = np.asarray(tau_grid, dtype=float)
    if np.any(tau < 0):
        raise ValueError("tau must be >= 0")
    g = p.gamma
    a = 0.75 * g
    disc = p.omega_c**2 - g**2 / 16
    if disc > 0:
        w = math.sqrt(disc)
        env = np.exp(-a * tau) * (np.cos(w * tau) + a / w * np.sin(w * tau))
    elif disc < 0:
        k = math.sqrt(-disc)
        # cosh/sinh folded into the decaying envelope to avoid overflow
        grow = np.exp((k - a) * tau)
        fall = np.exp(-(k + a) * tau)
        env = 0.5 * (grow + fall) + a / k * 0.5 * (grow - fall)
    else:
        env = np.exp(-a * tau) * (1 + a * tau)
    return G2Curve(tau, 1.0 - env)


def g2_numeric(p: EmitterParams, tau_grid) -> G2Curve:
    """g2(tau) as excited population after a detection, over its stationary value.

    A photon detection leaves the emitter in its ground state; the master
    equation is integrated from there.  Valid at any detuning.
    """
    tau = np.asarray(tau_grid, dtype=float)
    model = two_level_model(p)
    rho_ss = lindblad.steady_state(model)
    pop_ss = rho_ss[EXCITED, EXCITED].real
    if pop_ss <= 1e-300:
        raise ValueError("g2 is undefined: stationary excited population is zero (no drive)")
    prepend = tau.size == 0 or tau[0] > 0
    grid = np.concatenate([[0.0], tau]) if prepend else tau
    states = lindblad.evolve(model, GROUND_STATE, grid)
    pops = states[:, EXCITED, EXCITED].real
    if prepend:
        pops = pops[1:]
    return G2Curve(tau, pops / pop_ss)


def _pole_profile(x, height, center, hwhm, skew, offset, slope):
    """Real part of a single complex pole: Lorentzian plus dispersive admixture."""
    u = x - center
    return height * hwhm * (hwhm + skew * u) / (u**2 + hwhm**2) + offset + slope * u


def _fit_peak(freq, density, idx, est_hwhm):
    center0 = freq[idx]
    window = np.abs(freq - center0) <= 3 * est_hwhm
    if np.count_nonzero(window) < 5:
        raise SpectrumResolutionError("too few frequency points under a spectral peak to fit its width")
    x, y = freq[window], density[window]
    p0 = [density[idx], center0, est_hwhm, 0.0, 0.0, 0.0]
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", OptimizeWarning)
        popt, _ = curve_fit(_pole_profile, x, y, p0=p0, maxfev=20000)
    return Peak(float(popt[1]), float(2 * abs(popt[2])))


def _find_peaks(freq, density, rel_prominence=0.01):
    if density.max() <= 0:
        return []
    idxs, _ = find_peaks(density, prominence=rel_prominence * density.max())
    if idxs.size == 0:
        return []
    widths = peak_widths(density, idxs, rel_height=0.5)[0]
    df = np.mean(np.diff(freq))
    return [_fit_peak(freq, density, i, 0.5 * w * df) for i, w in zip(idxs, widths)]


def emission_spectrum(p: EmitterParams, freq_grid, tau_max: float | None = None) -> SpectrumResult:
    """Resonance-fluorescence spectrum from the first-order correlation.

    ``freq_grid`` holds offsets from the transition frequency in GHz and
    must be ascending and uniform with spacing below ``gamma / 2``.  The
    coherent (elastic) part ``|<sigma_minus>|**2`` is returned as a weight;
    the remaining incoherent part is Fourier transformed and normalised so
    that its frequency integral equals its total power.
    """
    if not p.omega_c > 0:
        raise ValueError("emission spectrum requires omega_c > 0")
    freq = np.asarray(freq_grid, dtype=float)
    if freq.ndim != 1 or freq.size < 3 or np.any(np.diff(freq) <= 0):
        raise ValueError("freq_grid must be strictly ascending with at least 3 points")
    if np.max(np.diff(freq)) > p.gamma / 2:
        raise SpectrumResolutionError(
            f"frequency spacing {np.max(np.diff(freq)):.4g} GHz cannot resolve gamma/2 = {p.gamma / 2:.4g} GHz"
        )

    model = two_level_model(p)
    rho_ss = lindblad.steady_state(model)
    mean_lowering = np.trace(SIGMA_MINUS @ rho_ss)
    coherent = float(abs(mean_lowering) ** 2)

    # offsets from the pump frequency, which is where the correlation is referenced
    nu = freq - p.detuning
    fastest = max(p.gamma, p.omega_c, abs(p.detuning))
    dt = min(1.0 / (20.0 * fastest), math.pi / (8.0 * np.max(np.abs(nu))))
    t_end = (SPECTRUM_TAU_MAX if tau_max is None else tau_max) / p.gamma
    n_tau = int(math.ceil(t_end / dt)) + 1
    tau = np.linspace(0.0, t_end, n_tau)
    g1 = lindblad.correlation(model, SIGMA_PLUS, SIGMA_MINUS, tau, rho_ss=rho_ss) - coherent

    weights = np.full(n_tau, tau[1] - tau[0])
    weights[0] *= 0.5
    weights[-1] *= 0.5
    wg = weights * g1
    density = np.empty_like(nu)
    chunk = max(1, 2_000_000 // n_tau)
    for start in range(0, nu.size, chunk):
        phase = np.exp(-1j * np.outer(nu[start:start + chunk], tau))
        density[start:start + chunk] = (phase @ wg).real / math.pi

    peaks = _find_peaks(freq, density)
    return SpectrumResult(freq, density, coherent, peaks)
