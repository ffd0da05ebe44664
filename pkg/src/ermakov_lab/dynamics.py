"""Reduced dynamics of the Gaussian ansatz.

The packet centre obeys ``qddot = -omega(t)**2 q`` and the width amplitude
obeys the Ermakov-type equation

    alphaddot = 1/alpha**3 - omega(t)**2 alpha - 2 g / (hbar alpha**2 sqrt(pi hbar/m)),

which for g = 0 is the classical Ermakov-Pinney equation. The same width
dynamics written in sigma = (hbar/m) alpha**2 is provided by
:func:`rhs_sigma` so both formulations can be integrated and compared.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Iterator

import numpy as np

from .core import (
    DomainError,
    GaussianState,
    NumericalBlowupError,
    PhysicalParams,
    ScenarioConfig,
    WidthCollapseError,
    require_positive,
    sigma_from_alpha,
)
from .invariant import drift_rhs_arrays, lewis_invariant_arrays

ALPHA_MIN = 1e-8


class RootNotFoundError(DomainError):
    pass


# --- right-hand sides --------------------------------------------------------

def rhs_q(state: GaussianState, params: PhysicalParams) -> float:
    """Centre-of-mass acceleration ``-omega**2 q``."""
    return -params.omega_sq(state.t) * state.q


def _alpha_accel(params: PhysicalParams, t, alpha):
    require_positive("alpha", alpha)
    return 1.0 / alpha**3 - params.omega_sq(t) * alpha - params.interaction_strength / (alpha * alpha)


def rhs_alpha(state: GaussianState, params: PhysicalParams) -> float:
    """Width-amplitude acceleration from the Ermakov-type equation."""
    return _alpha_accel(params, state.t, state.alpha)


def rhs_sigma(sigma, sigmadot, params: PhysicalParams, t) -> float:
    """Second derivative of sigma solved from the sigma-form width equation."""
    require_positive("sigma", sigma)
    hbar, m, g = params.hbar, params.mass, params.coupling
    return (sigmadot * sigmadot / (2.0 * sigma)
            - 2.0 * params.omega_sq(t) * sigma
            + 2.0 * hbar * hbar / (m * m * sigma)
            - 4.0 * g / (m * math.sqrt(math.pi * sigma)))


def k_of_t(sigma, params: PhysicalParams):
    """Slope k of the linearised force ``k (x - q)`` for width parameter sigma."""
    require_positive("sigma", sigma)
    hbar, m, g = params.hbar, params.mass, params.coupling
    return hbar * hbar / (m * m * sigma * sigma) - 2.0 * g / (sigma * m * np.sqrt(np.pi * sigma))


def stationary_alpha(params: PhysicalParams, omega_const: float,
                     bracket=(1e-3, 1e3), tol: float = 1e-12) -> float:
    """Stationary width amplitude for a constant trap frequency.

    Solves ``1/a**3 - w**2 a - G/a**2 = 0`` by bisection on ``bracket``
    followed by Newton polishing.
    """
    if not omega_const > 0:
        raise DomainError(f"omega_const must be > 0, got {omega_const}")
    w2 = omega_const * omega_const
    G = params.interaction_strength

    def f(a):
        return 1.0 / a**3 - w2 * a - G / (a * a)

    def fprime(a):
        return -3.0 / a**4 - w2 + 2.0 * G / a**3

    lo, hi = bracket
    flo, fhi = f(lo), f(hi)
    if flo * fhi > 0:
        raise RootNotFoundError(f"no sign change of the width equation on [{lo}, {hi}]")
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        fmid = f(mid)
        if fmid == 0.0:
            lo = hi = mid
            break
        if (fmid > 0) == (flo > 0):
            lo, flo = mid, fmid
        else:
            hi = mid
        if hi - lo < 1e-10 * hi:
            break
    a = 0.5 * (lo + hi)
    for _ in range(20):
        step = f(a) / fprime(a)
        a_new = a - step
        if not (bracket[0] <= a_new <= bracket[1]):
            break
        a = a_new
        if abs(step) < 1e-16 * a:
            break
    if abs(f(a)) > tol:
        raise RootNotFoundError(f"Newton polish did not converge (residual {f(a):.3g})")
    return a


def reduced_rhs(params: PhysicalParams) -> Callable[[float, np.ndarray], np.ndarray]:
    """First-order vector field for y = (q, qdot, alpha, alphadot)."""
    G = params.interaction_strength
    omega = params.omega

    def f(t, y):
        q, qd, a, ad = y
        if not a > 0:
            raise DomainError(f"alpha must be > 0, got {a}")
        w = omega(t)
        w2 = w * w
        return np.array([qd, -w2 * q, ad, 1.0 / (a * a * a) - w2 * a - G / (a * a)])

    return f


def sigma_form_rhs(params: PhysicalParams) -> Callable[[float, np.ndarray], np.ndarray]:
    """First-order vector field for y = (q, qdot, sigma, sigmadot)."""
    hbar, m, g = params.hbar, params.mass, params.coupling
    c_quantum = 2.0 * hbar * hbar / (m * m)
    c_inter = 4.0 * g / (m * math.sqrt(math.pi))
    omega = params.omega

    def f(t, y):
        q, qd, s, sd = y
        if not s > 0:
            raise DomainError(f"sigma must be > 0, got {s}")
        w = omega(t)
        w2 = w * w
        return np.array([qd, -w2 * q, sd,
                         sd * sd / (2.0 * s) - 2.0 * w2 * s + c_quantum / s - c_inter / math.sqrt(s)])

    return f


# --- integrators -------------------------------------------------------------

def rk4_step(f, t: float, y: np.ndarray, h: float) -> np.ndarray:
    k1 = f(t, y)
    k2 = f(t + 0.5 * h, y + 0.5 * h * k1)
    k3 = f(t + 0.5 * h, y + 0.5 * h * k2)
    k4 = f(t + h, y + h * k3)
    return y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


# Fehlberg 4(5) tableau
_RKF_C = (0.0, 1 / 4, 3 / 8, 12 / 13, 1.0, 1 / 2)
_RKF_A = (
    (),
    (1 / 4,),
    (3 / 32, 9 / 32),
    (1932 / 2197, -7200 / 2197, 7296 / 2197),
    (439 / 216, -8.0, 3680 / 513, -845 / 4104),
    (-8 / 27, 2.0, -3544 / 2565, 1859 / 4104, -11 / 40),
)
_RKF_B4 = (25 / 216, 0.0, 1408 / 2565, 2197 / 4104, -1 / 5, 0.0)
_RKF_B5 = (16 / 135, 0.0, 6656 / 12825, 28561 / 56430, -9 / 50, 2 / 55)


def rkf45_step(f, t: float, y: np.ndarray, h: float):
    """One Fehlberg step; returns (4th-order solution, error estimate vector)."""
    ks = []
    for c, row in zip(_RKF_C, _RKF_A):
        yi = y.copy()
        for a, k in zip(row, ks):
            yi += h * a * k
        ks.append(f(t + c * h, yi))
    y4 = y + h * sum(b * k for b, k in zip(_RKF_B4, ks))
    y5 = y + h * sum(b * k for b, k in zip(_RKF_B5, ks))
    return y4, y5 - y4


def fixed_step_times(t_end: float, dt: float) -> np.ndarray:
    """Uniform sample times ``i * dt``; a final shorter step lands on ``t_end``."""
    n = round(t_end / dt)
    if n >= 1 and abs(n * dt - t_end) <= 1e-9 * t_end:
        return np.arange(n + 1) * dt
    n = math.ceil(t_end / dt)
    times = np.arange(n + 1) * dt
    times[-1] = t_end
    return times


def _check(t: float, y: np.ndarray, alpha_index: int, alpha_min: float) -> None:
    if not np.all(np.isfinite(y)):
        raise NumericalBlowupError("non-finite state", t)
    if y[alpha_index] <= alpha_min:
        raise WidthCollapseError(f"width amplitude fell to {y[alpha_index]:.3g}", t)


def _guarded(f, alpha_min: float):
    def g(t, y):
        try:
            return f(t, y)
        except DomainError:
            raise WidthCollapseError("width vanished inside a step", t) from None
    return g


def integrate_fixed(f, y0, times, alpha_min: float = ALPHA_MIN, width_index: int = 2):
    """Classic RK4 over the given sample times; returns an (n, 4) array."""
    f = _guarded(f, alpha_min)
    ys = np.empty((len(times), len(y0)))
    y = np.asarray(y0, dtype=float)
    ys[0] = y
    for i in range(1, len(times)):
        t = times[i - 1]
        y = rk4_step(f, t, y, times[i] - t)
        _check(times[i], y, width_index, alpha_min)
        ys[i] = y
    return ys


def integrate_adaptive(f, y0, t_end: float, h0: float, tol: float,
                       alpha_min: float = ALPHA_MIN, width_index: int = 2, max_steps: int = 10_000_000):
    """Adaptive RKF45 from 0 to ``t_end``; ``h0`` is the first and largest step."""
    f = _guarded(f, alpha_min)
    t = 0.0
    y = np.asarray(y0, dtype=float)
    ts, ys = [t], [y]
    h = h0
    for _ in range(max_steps):
        if t >= t_end:
            break
        h = min(h, t_end - t, h0)
        y_new, err_vec = rkf45_step(f, t, y, h)
        scale = tol * (1.0 + np.maximum(np.abs(y), np.abs(y_new)))
        err = float(np.max(np.abs(err_vec) / scale))
        if not math.isfinite(err):
            raise NumericalBlowupError("non-finite error estimate", t)
        if err <= 1.0:
            t = t + h if t_end - (t + h) > 1e-14 * t_end else t_end
            y = y_new
            _check(t, y, width_index, alpha_min)
            ts.append(t)
            ys.append(y)
        factor = 5.0 if err == 0 else min(5.0, max(0.2, 0.9 * err ** -0.2))
        h *= factor
        if h < 1e-14 * max(1.0, t_end):
            raise NumericalBlowupError("step size underflow", t)
    else:
        raise NumericalBlowupError("maximum step count exceeded", t)
    return np.array(ts), np.array(ys)


# --- trajectories ------------------------------------------------------------

TRAJECTORY_COLUMNS = ("t", "q", "qdot", "alpha", "alphadot", "sigma", "sigmadot", "I", "dIdt_analytic")


@dataclass(frozen=True)
class TrajectoryRecord:
    """Time series of accepted states with derived width and invariant data."""

    t: np.ndarray
    q: np.ndarray
    qdot: np.ndarray
    alpha: np.ndarray
    alphadot: np.ndarray
    sigma: np.ndarray
    sigmadot: np.ndarray
    I: np.ndarray
    dIdt_analytic: np.ndarray

    @classmethod
    def from_states(cls, params: PhysicalParams, t, ys) -> "TrajectoryRecord":
        t = np.asarray(t, dtype=float)
        q, qd, a, ad = (np.ascontiguousarray(ys[:, i]) for i in range(4))
        sigma, sigmadot = sigma_from_alpha(params, a, ad)
        return cls(t, q, qd, a, ad, sigma, sigmadot,
                   lewis_invariant_arrays(q, qd, a, ad),
                   drift_rhs_arrays(params, q, qd, a, ad))

    def __len__(self) -> int:
        return self.t.size

    def state(self, i: int) -> GaussianState:
        return GaussianState(float(self.t[i]), float(self.q[i]), float(self.qdot[i]),
                             float(self.alpha[i]), float(self.alphadot[i]))

    def states(self) -> Iterator[GaussianState]:
        for i in range(len(self)):
            yield self.state(i)

    def window(self, start: int, stop: int) -> "TrajectoryRecord":
        s = slice(start, stop)
        return TrajectoryRecord(*(getattr(self, c)[s] for c in TRAJECTORY_COLUMNS))

    def subsample(self, every: int) -> "TrajectoryRecord":
        s = slice(None, None, every)
        return TrajectoryRecord(*(getattr(self, c)[s] for c in TRAJECTORY_COLUMNS))

    def to_csv(self, path) -> None:
        cols = np.column_stack([getattr(self, c) for c in TRAJECTORY_COLUMNS])
        np.savetxt(path, cols, delimiter=",", fmt="%.17g", header=",".join(TRAJECTORY_COLUMNS), comments="")

    @classmethod
    def from_csv(cls, path) -> "TrajectoryRecord":
        data = np.loadtxt(Path(path), delimiter=",", skiprows=1, ndmin=2)
        return cls(*(np.ascontiguousarray(data[:, i]) for i in range(len(TRAJECTORY_COLUMNS))))


def integrate(config: ScenarioConfig, alpha_min: float = ALPHA_MIN) -> TrajectoryRecord:
    """Integrate the centre and width equations from ``config.initial``.

    Fixed-step RK4 with step ``config.dt`` unless ``config.method`` is
    ``"rkf45"``, in which case the step adapts to ``config.tol`` with
    ``config.dt`` as the largest step.

    Raises
    ------
    WidthCollapseError
        alpha dropped to ``alpha_min`` or below.
    NumericalBlowupError
        a non-finite value appeared.
    """
    params = config.params
    f = reduced_rhs(params)
    y0 = config.initial.as_array()
    if config.method == "rkf45":
        times, ys = integrate_adaptive(f, y0, config.t_end, config.dt, config.tol, alpha_min)
    else:
        times = fixed_step_times(config.t_end, config.dt)
        ys = integrate_fixed(f, y0, times, alpha_min)
    return TrajectoryRecord.from_states(params, times, ys)


def integrate_sigma_form(config: ScenarioConfig, sigma_min: float = 0.0):
    """Integrate (q, sigma) directly with RK4; returns (t, q, qdot, sigma, sigmadot)."""
    params = config.params
    init = config.initial
    s0, sd0 = sigma_from_alpha(params, init.alpha, init.alphadot)
    times = fixed_step_times(config.t_end, config.dt)
    ys = integrate_fixed(sigma_form_rhs(params), np.array([init.q, init.qdot, s0, sd0]), times,
                         alpha_min=sigma_min)
    return times, ys[:, 0], ys[:, 1], ys[:, 2], ys[:, 3]

