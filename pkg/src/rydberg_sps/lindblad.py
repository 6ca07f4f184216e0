"""Dense Lindblad master-equation solver for few-level systems.

States are plain ``(d, d)`` complex arrays.  Superoperators act on the
row-major vectorisation ``rho.ravel()``, for which

    vec(A @ rho @ B) = kron(A, B.T) @ vec(rho).

Rates and Hamiltonian entries share one unit (GHz in this package), so
times come out in ns.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg
from scipy.integrate import solve_ivp

HERMITIAN_TOL = 1e-10
TRACE_TOL = 1e-10
POSITIVITY_TOL = 1e-8

RTOL = 1e-9
ATOL = 1e-12


class EngineError(RuntimeError):
    """Base class for numerical failures in the engine."""


class IntegrationError(EngineError):
    def __init__(self, t, message):
        super().__init__(f"integration failed at t={t:.6g}: {message}")
        self.t = t


class SteadyStateError(EngineError):
    pass


def _as_operator(a, name="operator") -> np.ndarray:
    a = np.array(a, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] < 1:
        raise ValueError(f"{name} must be a square matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError(f"{name} has non-finite entries")
    return a


@dataclass(frozen=True)
class LindbladModel:
    """Hamiltonian plus a list of ``(jump_operator, rate)`` pairs."""

    hamiltonian: np.ndarray
    jumps: list = field(default_factory=list)

    def __post_init__(self):
        h = _as_operator(self.hamiltonian, "hamiltonian")
        if np.max(np.abs(h - h.conj().T)) > HERMITIAN_TOL:
            raise ValueError("hamiltonian is not Hermitian")
        jumps = []
        for op, rate in self.jumps:
            op = _as_operator(op, "jump operator")
            if op.shape != h.shape:
                raise ValueError(f"jump operator shape {op.shape} does not match hamiltonian {h.shape}")
            if not rate >= 0:
                raise ValueError(f"jump rates must be >= 0, got {rate!r}")
            jumps.append((op, float(rate)))
        object.__setattr__(self, "hamiltonian", h)
        object.__setattr__(self, "jumps", jumps)

    @property
    def dim(self) -> int:
        return self.hamiltonian.shape[0]


def check_density_matrix(rho, herm_tol=HERMITIAN_TOL, trace_tol=TRACE_TOL, pos_tol=POSITIVITY_TOL) -> np.ndarray:
    """Validate a density matrix and return it as a complex array."""
    rho = _as_operator(rho, "density matrix")
    herm_err = np.max(np.abs(rho - rho.conj().T))
    if herm_err > herm_tol:
        raise ValueError(f"density matrix not Hermitian (max deviation {herm_err:.3g})")
    tr = np.trace(rho)
    if abs(tr - 1) > trace_tol:
        raise ValueError(f"density matrix trace is {tr:.12g}, expected 1")
    min_eig = np.linalg.eigvalsh(0.5 * (rho + rho.conj().T))[0]
    if min_eig < -pos_tol:
        raise ValueError(f"density matrix has negative eigenvalue {min_eig:.3g}")
    return rho


def projector(dim: int, k: int) -> np.ndarray:
    p = np.zeros((dim, dim), dtype=complex)
    p[k, k] = 1.0
    return p


def transition(dim: int, to: int, frm: int) -> np.ndarray:
    """The operator |to><frm|."""
    op = np.zeros((dim, dim), dtype=complex)
    op[to, frm] = 1.0
    return op


def build_liouvillian(model: LindbladModel) -> np.ndarray:
    """Generator L with vec(d rho/dt) = L @ vec(rho)."""
    h = model.hamiltonian
    eye = np.eye(model.dim)
    liou = -1j * (np.kron(h, eye) - np.kron(eye, h.T))
    for op, rate in model.jumps:
        if rate == 0:
            continue
        op_dag_op = op.conj().T @ op
        liou += rate * (
            np.kron(op, op.conj())
            - 0.5 * np.kron(op_dag_op, eye)
            - 0.5 * np.kron(eye, op_dag_op.T)
        )
    return liou


def apply_liouvillian(liou: np.ndarray, rho: np.ndarray) -> np.ndarray:
    d = rho.shape[0]
    return (liou @ rho.ravel()).reshape(d, d)


def evolve(model: LindbladModel, rho0, t_grid, rtol=RTOL, atol=ATOL) -> np.ndarray:
    """Integrate the master equation from ``t_grid[0]``.

    Uses an adaptive 8th-order Dormand-Prince scheme.  Returns an array of
    shape ``(len(t_grid), d, d)`` with the state at each requested time.
    """
    rho0 = check_density_matrix(rho0)
    if rho0.shape[0] != model.dim:
        raise ValueError(f"rho0 has dimension {rho0.shape[0]}, model has {model.dim}")
    t_grid = np.asarray(t_grid, dtype=float)
    if t_grid.ndim != 1 or t_grid.size == 0:
        raise ValueError("t_grid must be a non-empty 1-d sequence")
    if t_grid[0] < 0 or np.any(np.diff(t_grid) < 0):
        raise ValueError("t_grid must be ascending and start at t >= 0")
    return _integrate(build_liouvillian(model), rho0, t_grid, rtol, atol)


def _integrate(liou, rho0, t_grid, rtol, atol):
    d = rho0.shape[0]
    if t_grid[-1] == t_grid[0]:
        return np.repeat(rho0[None], t_grid.size, axis=0)
    sol = solve_ivp(
        lambda t, y: liou @ y,
        (t_grid[0], t_grid[-1]),
        rho0.ravel(),
        method="DOP853",
        t_eval=t_grid,
        rtol=rtol,
        atol=atol,
    )
    if sol.status != 0:
        t_fail = sol.t[-1] if sol.t.size else t_grid[0]
        raise IntegrationError(t_fail, sol.message)
    return sol.y.T.reshape(-1, d, d)


def steady_state(model: LindbladModel, null_tol=1e-10, residual_tol=1e-9) -> np.ndarray:
    """Unique stationary state, from a least-squares solve of [L; Tr] rho = [0; 1]."""
    liou = build_liouvillian(model)
    d = model.dim
    sv = scipy.linalg.svdvals(liou)
    scale = max(sv[0], 1.0)
    null_dim = int(np.sum(sv < null_tol * scale))
    if null_dim > 1:
        raise SteadyStateError(f"Liouvillian has a {null_dim}-dimensional null space; steady state is not unique")
    trace_row = np.eye(d).ravel()[None, :].astype(complex)
    a = np.vstack([liou, trace_row])
    b = np.zeros(d * d + 1, dtype=complex)
    b[-1] = 1.0
    vec, *_ = scipy.linalg.lstsq(a, b)
    rho = vec.reshape(d, d)
    rho = 0.5 * (rho + rho.conj().T)
    residual = np.linalg.norm(liou @ rho.ravel())
    if residual > residual_tol * scale:
        raise SteadyStateError(f"steady-state residual {residual:.3g} exceeds tolerance")
    return rho


def propagate(liou: np.ndarray, x0: np.ndarray, t_grid) -> np.ndarray:
    """Apply exp(L t) to an arbitrary operator ``x0`` for every t in ``t_grid``.

    Steps between consecutive grid points with matrix exponentials; equal
    increments reuse one propagator, so uniform grids cost a single expm.
    """
    d = x0.shape[0]
    t_grid = np.asarray(t_grid, dtype=float)
    if t_grid.ndim != 1 or t_grid.size == 0:
        raise ValueError("tau grid must be a non-empty 1-d sequence")
    if t_grid[0] < 0 or np.any(np.diff(t_grid) < 0):
        raise ValueError("tau grid must be ascending and start at tau >= 0")
    out = np.empty((t_grid.size, d * d), dtype=complex)
    cache = {}
    vec = scipy.linalg.expm(liou * t_grid[0]) @ x0.ravel() if t_grid[0] > 0 else x0.ravel().astype(complex)
    out[0] = vec
    for k in range(1, t_grid.size):
        dt = t_grid[k] - t_grid[k - 1]
        key = round(dt, 15)
        step = cache.get(key)
        if step is None:
            step = cache[key] = scipy.linalg.expm(liou * dt)
        vec = step @ vec
        out[k] = vec
    return out.reshape(-1, d, d)


def correlation(model: LindbladModel, a, b, tau_grid, c=None, rho_ss=None) -> np.ndarray:
    """Two-time correlation by the quantum regression theorem.

    Returns ``C(tau) = Tr[a exp(L tau)(b rho_ss c)]``.  With ``c`` omitted
    this is ``<a(tau) b(0)>``; passing ``b = s_minus, c = s_plus`` together
    with ``a = s_plus s_minus`` gives the unnormalised intensity correlation.
    """
    a = _as_operator(a, "a")
    b = _as_operator(b, "b")
    if rho_ss is None:
        rho_ss = steady_state(model)
    x0 = b @ rho_ss
    if c is not None:
        x0 = x0 @ _as_operator(c, "c")
    states = propagate(build_liouvillian(model), x0, tau_grid)
    return np.einsum("ij,tji->t", a, states)
