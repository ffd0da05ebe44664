"""Hydrodynamic (Madelung-Bohm) fields of the Gaussian ansatz and their residuals.

The density is ``rho = (pi sigma)**-1/2 exp(-(x - q)**2 / sigma)`` and the
velocity field is affine, ``v = sigmadot/(2 sigma) (x - q) + qdot``. Closed
forms are used wherever the ansatz provides them; the residual functions
check the continuity and Euler equations, the cubic force bracket and the
quantum-force closure against those closed forms.

All field functions broadcast over ``x``.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .core import GaussianState, PhysicalParams, require_positive, sigma_from_alpha
from .dynamics import k_of_t, rhs_alpha, rhs_q
from .numerics import central_diff4, second_diff4, trapezoid, uniform_spacing

EDGE_DENSITY_MAX = 1e-16


class GridWarning(UserWarning):
    """The grid is too narrow for the density to have decayed at its edges."""


def _width(state: GaussianState, params: PhysicalParams):
    return sigma_from_alpha(params, state.alpha, state.alphadot)


def gaussian_density(x, state: GaussianState, params: PhysicalParams):
    sigma, _ = _width(state, params)
    u = np.asarray(x) - state.q
    return np.exp(-u * u / sigma) / np.sqrt(np.pi * sigma)


def density_gradient(x, state, params):
    sigma, _ = _width(state, params)
    u = np.asarray(x) - state.q
    return -2.0 * u / sigma * gaussian_density(x, state, params)


def density_time_derivative(x, state, params):
    """Analytic partial derivative of the density in time at fixed x."""
    sigma, sigmadot = _width(state, params)
    u = np.asarray(x) - state.q
    rho = gaussian_density(x, state, params)
    return -0.5 * sigmadot / sigma * rho + rho * (u * u / sigma**2 * sigmadot + 2.0 * u / sigma * state.qdot)


def quantum_velocity(x, state, params):
    sigma, sigmadot = _width(state, params)
    return sigmadot / (2.0 * sigma) * (np.asarray(x) - state.q) + state.qdot


def bohm_potential(x, state, params):
    """Closed-form Bohm potential ``-(hbar**2/2m) (sqrt rho)'' / sqrt rho``."""
    sigma, _ = _width(state, params)
    u = np.asarray(x) - state.q
    return -(params.hbar**2 / (2.0 * params.mass)) * (u * u / sigma**2 - 1.0 / sigma)


def bohm_force(x, state, params):
    """Spatial derivative of :func:`bohm_potential`."""
    sigma, _ = _width(state, params)
    u = np.asarray(x) - state.q
    return -(params.hbar**2 / params.mass) * u / sigma**2


def gp_potential(x, state, params):
    return params.coupling / params.mass * gaussian_density(x, state, params)


# --- cubic force bracket -----------------------------------------------------

def quantum_bracket(x, state, params):
    """hbar**2/(4 m**2) [rho'''/rho - 2 rho' rho''/rho**2 + (rho'/rho)**3].

    Evaluated term by term from the Gaussian logarithmic-derivative ratios so
    that the tails do not underflow.
    """
    sigma, _ = _width(state, params)
    u = np.asarray(x) - state.q
    r1 = -2.0 * u / sigma
    r2 = 4.0 * u * u / sigma**2 - 2.0 / sigma
    r3 = -8.0 * u**3 / sigma**3 + 12.0 * u / sigma**2
    return params.hbar**2 / (4.0 * params.mass**2) * (r3 - 2.0 * r1 * r2 + r1**3)


def interaction_bracket(x, state, params, linearize: bool = True):
    """(g/m) rho'. With ``linearize`` the Gaussian factor is taken at its peak."""
    sigma, _ = _width(state, params)
    u = np.asarray(x) - state.q
    if linearize:
        rho = 1.0 / np.sqrt(np.pi * sigma)
    else:
        rho = gaussian_density(x, state, params)
    return params.coupling / params.mass * (-2.0 * u / sigma) * rho


def cubic_bracket(x, state, params, linearize: bool = True):
    return quantum_bracket(x, state, params) + interaction_bracket(x, state, params, linearize)


# --- residual checks ---------------------------------------------------------

def continuity_residual(window, x):
    """Continuity-equation residual along a window of a trajectory.

    ``window`` is a :class:`~ermakov_lab.dynamics.TrajectoryRecord` (or any
    object with ``t, q, qdot, sigma, sigmadot`` arrays) with at least five
    uniformly spaced samples. The time derivative of the density comes from
    a fourth-order central difference across samples, the flux divergence
    from the analytic velocity field. Returns ``(t_interior, residual)`` with
    ``residual`` of shape ``(len(window) - 4, len(x))``.
    """
    h = uniform_spacing(window.t)
    x = np.asarray(x, dtype=float)
    u = x[None, :] - np.asarray(window.q)[:, None]
    sigma = np.asarray(window.sigma)[:, None]
    rho = np.exp(-u * u / sigma) / np.sqrt(np.pi * sigma)
    drho_dt = central_diff4(rho, h, axis=0)

    inner = slice(2, -2)
    u, sigma, rho = u[inner], sigma[inner], rho[inner]
    sigmadot = np.asarray(window.sigmadot)[inner, None]
    qdot = np.asarray(window.qdot)[inner, None]
    v = sigmadot / (2.0 * sigma) * u + qdot
    flux_div = rho * (-2.0 * u / sigma * v + sigmadot / (2.0 * sigma))
    return np.asarray(window.t)[inner], drho_dt + flux_div


@dataclass(frozen=True)
class EulerResidual:
    """Mismatch of the Euler equation split into its two independent parts.

    ``constant`` is the part independent of x (centre-of-mass condition),
    ``linear`` the coefficient of (x - q) (width condition), ``pointwise``
    the full left-minus-right value at the requested points.
    """

    constant: float
    linear: float
    pointwise: np.ndarray


def euler_residual(state, params, x=0.0, qddot=None, sigmaddot=None) -> EulerResidual:
    """Plug the affine velocity field into the Euler equation with force k(t)(x - q).

    Second derivatives default to the reduced equations of motion; pass
    ``qddot`` or ``sigmaddot`` explicitly to probe off-shell states.
    """
    hbar, m = params.hbar, params.mass
    sigma, sigmadot = _width(state, params)
    if qddot is None:
        qddot = rhs_q(state, params)
    if sigmaddot is None:
        sigmaddot = 2.0 * hbar / m * (state.alphadot**2 + state.alpha * rhs_alpha(state, params))
    w2 = params.omega_sq(state.t)
    k = k_of_t(sigma, params)
    qdot = state.qdot
    u = np.asarray(x, dtype=float) - state.q

    grad_v = sigmadot / (2.0 * sigma)
    v = grad_v * u + qdot
    dv_dt = sigmaddot / (2.0 * sigma) * u - sigmadot**2 / (2.0 * sigma**2) * u - grad_v * qdot + qddot
    pointwise = dv_dt + v * grad_v + w2 * (u + state.q) - k * u

    constant = (qddot - grad_v * qdot) + qdot * grad_v + w2 * state.q
    linear = sigmaddot / (2.0 * sigma) - sigmadot**2 / (4.0 * sigma**2) + w2 - k
    return EulerResidual(float(constant), float(linear), pointwise)


def _edge_check(rho_edges) -> None:
    worst = float(np.max(rho_edges))
    if worst > EDGE_DENSITY_MAX:
        warnings.warn(f"edge density {worst:.3g} exceeds {EDGE_DENSITY_MAX:g}; widen the grid",
                      GridWarning, stacklevel=3)


def quantum_force_expectation(state, params, x) -> float:
    """Trapezoid quadrature of ``rho dV_qu/dx`` over the grid ``x``."""
    x = np.asarray(x, dtype=float)
    rho = gaussian_density(x, state, params)
    _edge_check(rho[[0, -1]])
    return trapezoid(rho * bohm_force(x, state, params), x)


def density_mean(state, params, x) -> float:
    x = np.asarray(x, dtype=float)
    rho = gaussian_density(x, state, params)
    return trapezoid(rho * x, x) / trapezoid(rho, x)


@dataclass(frozen=True)
class QuantumForceCheck:
    expectation: float
    at_mean: float
    mean: float


def quantum_force_check_sampled(x, rho, params, floor: float = 1e-14) -> QuantumForceCheck:
    """Both readings of the quantum-force closure for an arbitrary sampled density.

    Returns the expectation ``<dV_qu/dx>`` and the pointwise force at the
    mean position. Derivatives are fourth-order finite differences on the
    uniform grid ``x``; points where ``rho < floor`` are excluded.
    """
    x = np.asarray(x, dtype=float)
    rho = np.asarray(rho, dtype=float)
    dx = uniform_spacing(x)
    _edge_check(rho[[0, -1]])
    amp = np.sqrt(rho)
    v_qu = -(params.hbar**2 / (2.0 * params.mass)) * second_diff4(amp, dx) / amp[2:-2]
    force = central_diff4(v_qu, dx)
    xs = x[4:-4]
    rs = rho[4:-4]
    keep = rs >= floor
    norm = trapezoid(rho, x)
    mean = trapezoid(rho * x, x) / norm
    expectation = trapezoid(np.where(keep, rs * force, 0.0), xs) / norm
    at_mean = float(np.interp(mean, xs, force))
    return QuantumForceCheck(expectation, at_mean, mean)


# --- snapshots ---------------------------------------------------------------

@dataclass(frozen=True)
class FieldSnapshot:
    x: np.ndarray
    rho: np.ndarray
    v_qu: np.ndarray
    V_qu: np.ndarray
    V_gp: np.ndarray

    def to_csv(self, path) -> None:
        np.savetxt(path, np.column_stack([self.x, self.rho, self.v_qu, self.V_qu, self.V_gp]),
                   delimiter=",", fmt="%.17g", header="x,rho,v_qu,V_qu,V_gp", comments="")


def field_snapshot(state, params, x) -> FieldSnapshot:
    require_positive("alpha", state.alpha)
    x = np.asarray(x, dtype=float)
    return FieldSnapshot(x, gaussian_density(x, state, params), quantum_velocity(x, state, params),
                         bohm_potential(x, state, params), gp_potential(x, state, params))


@dataclass(frozen=True)
class ResidualReport:
    t: np.ndarray
    max_continuity_residual: np.ndarray
    euler_const: np.ndarray
    euler_linear: np.ndarray

    def to_csv(self, path) -> None:
        cols = np.column_stack([self.t, self.max_continuity_residual, self.euler_const, self.euler_linear])
        np.savetxt(path, cols, delimiter=",", fmt="%.17g",
                   header="t,max_continuity_residual,euler_const,euler_linear", comments="")


def residual_report(traj, params, x, chunk: int = 512) -> ResidualReport:
    """Continuity and Euler residuals at every interior sample of ``traj``."""
    n = len(traj)
    ts, peaks = [], []
    # chunks overlap by four samples so every interior sample is covered once
    for start in range(0, n - 4, chunk):
        t, cont = continuity_residual(traj.window(start, min(start + chunk + 4, n)), x)
        ts.append(t)
        peaks.append(np.max(np.abs(cont), axis=1))
    euler = [euler_residual(traj.state(i), params) for i in range(2, n - 2)]
    return ResidualReport(np.concatenate(ts), np.concatenate(peaks),
                          np.array([e.constant for e in euler]),
                          np.array([e.linear for e in euler]))
