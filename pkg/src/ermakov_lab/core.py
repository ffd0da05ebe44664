"""Shared domain types: physical parameters, frequency schedules, Gaussian states.

Every other module takes its symbols from here. The canonical width variable
is ``alpha``; the Gaussian width parameter ``sigma`` (density
``exp(-(x - q)**2 / sigma)``) is derived through ``sigma = (hbar/m) alpha**2``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Optional, Union

import numpy as np


class ErmakovLabError(Exception):
    """Base class for all errors raised by this package."""


class DomainError(ErmakovLabError, ValueError):
    """An argument lies outside the domain of a formula (e.g. alpha <= 0)."""


class ConfigError(ErmakovLabError, ValueError):
    """A scenario configuration violates one of its invariants."""


class NumericalFailure(ErmakovLabError, ArithmeticError):
    """A run aborted for numerical reasons; ``t`` is the failure time."""

    def __init__(self, message: str, t: float):
        super().__init__(f"{message} (t = {t:.10g})")
        self.t = t


class WidthCollapseError(NumericalFailure):
    pass


class NumericalBlowupError(NumericalFailure):
    pass


# --- frequency schedules -----------------------------------------------------

@dataclass(frozen=True)
class Constant:
    w0: float

    kind = "constant"

    def __call__(self, t):
        if np.ndim(t):
            return np.full(np.shape(t), float(self.w0))
        return float(self.w0)


@dataclass(frozen=True)
class LinearRamp:
    w0: float
    rate: float

    kind = "linear"

    def __call__(self, t):
        return self.w0 + self.rate * t


@dataclass(frozen=True)
class Sinusoidal:
    """``w0 * (1 + eps * sin(bigomega * t))``."""

    w0: float
    eps: float
    bigomega: float

    kind = "sinusoidal"

    def __call__(self, t):
        return self.w0 * (1.0 + self.eps * np.sin(self.bigomega * t))


OmegaSchedule = Union[Constant, LinearRamp, Sinusoidal]


def omega_eval(schedule: OmegaSchedule, t):
    """Angular frequency of ``schedule`` at time ``t`` (scalar or array)."""
    return schedule(t)


# --- parameters and states ---------------------------------------------------

@dataclass(frozen=True)
class PhysicalParams:
    """Coefficients of the trapped Gross-Pitaevskii problem.

    ``coupling`` is the nonlinear strength g and may take any sign; g = 0 is
    the linear Schrodinger limit.
    """

    hbar: float = 1.0
    mass: float = 1.0
    coupling: float = 0.0
    omega: OmegaSchedule = field(default_factory=lambda: Constant(1.0))

    def __post_init__(self):
        if not (self.hbar > 0):
            raise ConfigError(f"hbar must be > 0, got {self.hbar}")
        if not (self.mass > 0):
            raise ConfigError(f"mass must be > 0, got {self.mass}")
        if not math.isfinite(self.coupling):
            raise ConfigError(f"coupling must be finite, got {self.coupling}")

    def omega_sq(self, t):
        w = self.omega(t)
        return w * w

    @property
    def interaction_strength(self) -> float:
        """``2 g / (hbar sqrt(pi hbar / m))``, the g-term prefactor of the width equation."""
        return 2.0 * self.coupling / (self.hbar * math.sqrt(math.pi * self.hbar / self.mass))


@dataclass(frozen=True)
class GaussianState:
    """Reduced state (q, qdot, alpha, alphadot) at time t.

    Construction is not validated; every formula that needs ``alpha > 0``
    checks it and raises :class:`DomainError`.
    """

    t: float
    q: float
    qdot: float
    alpha: float
    alphadot: float

    def as_array(self) -> np.ndarray:
        return np.array([self.q, self.qdot, self.alpha, self.alphadot])

    @classmethod
    def from_array(cls, t: float, y) -> "GaussianState":
        return cls(float(t), float(y[0]), float(y[1]), float(y[2]), float(y[3]))

    @classmethod
    def from_sigma(cls, params: PhysicalParams, t, q, qdot, sigma, sigmadot) -> "GaussianState":
        alpha, alphadot = alpha_from_sigma(params, sigma, sigmadot)
        return cls(t, q, qdot, alpha, alphadot)


def require_positive(name: str, value) -> None:
    if np.any(~(np.asarray(value) > 0)):
        raise DomainError(f"{name} must be > 0, got {value}")


def sigma_from_alpha(params: PhysicalParams, alpha, alphadot):
    """Map (alpha, alphadot) to (sigma, sigmadot) with sigma = (hbar/m) alpha**2."""
    require_positive("alpha", alpha)
    s = params.hbar / params.mass
    return s * alpha * alpha, 2.0 * s * alpha * alphadot


def alpha_from_sigma(params: PhysicalParams, sigma, sigmadot):
    """Inverse of :func:`sigma_from_alpha`."""
    require_positive("sigma", sigma)
    s = params.hbar / params.mass
    alpha = np.sqrt(sigma / s)
    alphadot = sigmadot / (2.0 * s * alpha)
    if np.ndim(alpha) == 0:
        return float(alpha), float(alphadot)
    return alpha, alphadot


def state_sigma(state: GaussianState, params: PhysicalParams):
    return sigma_from_alpha(params, state.alpha, state.alphadot)


# --- scenario ----------------------------------------------------------------

@dataclass(frozen=True)
class GridSpec:
    n: int = 2048
    length: float = 40.0

    def __post_init__(self):
        n = self.n
        if n < 256 or n & (n - 1):
            raise ConfigError(f"grid.n must be a power of two >= 256, got {n}")
        if not (self.length > 0):
            raise ConfigError(f"grid.length must be > 0, got {self.length}")


METHODS = ("rk4", "rkf45")


@dataclass(frozen=True)
class ScenarioConfig:
    params: PhysicalParams
    initial: GaussianState
    t_end: float
    dt: float
    tol: float = 1e-10
    grid: Optional[GridSpec] = None
    method: str = "rk4"

    def __post_init__(self):
        if not (self.t_end > 0):
            raise ConfigError(f"t_end must be > 0, got {self.t_end}")
        if not (self.dt > 0):
            raise ConfigError(f"dt must be > 0, got {self.dt}")
        if self.dt > self.t_end:
            raise ConfigError(f"dt ({self.dt}) must not exceed t_end ({self.t_end})")
        if not (self.tol > 0):
            raise ConfigError(f"tol must be > 0, got {self.tol}")
        if not (self.initial.alpha > 0):
            raise ConfigError(f"alpha0 must be > 0, got {self.initial.alpha}")
        if self.method not in METHODS:
            raise ConfigError(f"method must be one of {METHODS}, got {self.method!r}")

    def with_(self, **changes) -> "ScenarioConfig":
        return replace(self, **changes)
