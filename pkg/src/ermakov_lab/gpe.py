"""Split-step Fourier solver for the trapped 1D Gross-Pitaevskii equation.

    i hbar psi_t = -(hbar**2 / 2m) psi_xx + 1/2 m omega(t)**2 x**2 psi + g |psi|**2 psi

on a uniform periodic grid, used as an independent oracle for the reduced
Gaussian dynamics. Time stepping is Strang splitting: half a step of
potential plus nonlinearity (a pointwise phase, exact because |psi| does not
change under it), a full kinetic step in Fourier space, and another half
potential step. The trap frequency is sampled at the step midpoint.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import List, Optional

import numpy as np

from .core import (
    ErmakovLabError,
    GaussianState,
    GridSpec,
    NumericalBlowupError,
    PhysicalParams,
    ScenarioConfig,
    alpha_from_sigma,
    require_positive,
    sigma_from_alpha,
)
from .dynamics import integrate
from .invariant import lewis_invariant_arrays
from .madelung import EDGE_DENSITY_MAX, gaussian_density
from .numerics import central_diff4


class GridError(ErmakovLabError, ValueError):
    """The grid cannot represent the requested wavefunction."""


@dataclass(frozen=True)
class SpatialGrid:
    """Periodic grid of ``n`` points ``x_j = -L/2 + j L/n``."""

    n: int = 2048
    length: float = 40.0

    def __post_init__(self):
        GridSpec(self.n, self.length)  # validates

    @classmethod
    def from_spec(cls, spec: GridSpec) -> "SpatialGrid":
        return cls(spec.n, spec.length)

    @property
    def dx(self) -> float:
        return self.length / self.n

    @cached_property
    def x(self) -> np.ndarray:
        return -0.5 * self.length + np.arange(self.n) * self.dx

    @cached_property
    def k(self) -> np.ndarray:
        """Angular wavenumbers in FFT order, covering {-n/2, ..., n/2 - 1} 2 pi / L."""
        return 2.0 * np.pi * np.fft.fftfreq(self.n, d=self.dx)


@dataclass
class ComplexField:
    psi: np.ndarray
    t: float
    grid: SpatialGrid

    def norm(self) -> float:
        return float(np.sum(np.abs(self.psi) ** 2) * self.grid.dx)

    def density(self) -> np.ndarray:
        return np.abs(self.psi) ** 2

    def copy(self) -> "ComplexField":
        return ComplexField(self.psi.copy(), self.t, self.grid)

    def to_csv(self, path) -> None:
        psi = self.psi
        np.savetxt(path, np.column_stack([self.grid.x, psi.real, psi.imag, np.abs(psi) ** 2]),
                   delimiter=",", fmt="%.17g", header="x,re_psi,im_psi,rho", comments="")


def check_edges(rho, what: str = "density") -> None:
    edge = max(float(rho[0]), float(rho[-1]))
    if edge > EDGE_DENSITY_MAX:
        raise GridError(f"{what} at the grid edge is {edge:.3g} > {EDGE_DENSITY_MAX:g}; widen the grid")


def init_wavefunction(state: GaussianState, params: PhysicalParams, grid: SpatialGrid) -> ComplexField:
    """Gaussian wavefunction whose density and velocity field match ``state``.

    The phase is ``S = (m/hbar) [sigmadot/(4 sigma) (x - q)**2 + qdot (x - q)]``,
    so that ``(hbar/m) dS/dx`` reproduces the affine ansatz velocity.
    """
    require_positive("alpha", state.alpha)
    sigma, sigmadot = sigma_from_alpha(params, state.alpha, state.alphadot)
    x = grid.x
    rho = gaussian_density(x, state, params)
    check_edges(rho)
    u = x - state.q
    phase = (params.mass / params.hbar) * (sigmadot / (4.0 * sigma) * u * u + state.qdot * u)
    psi = np.sqrt(rho) * np.exp(1j * phase)
    psi /= math.sqrt(np.sum(np.abs(psi) ** 2) * grid.dx)
    return ComplexField(psi, state.t, grid)


def _potential_phase(psi, params, x2, t_mid, h):
    """Pointwise factor for a potential+nonlinearity sub-step of length h."""
    v = 0.5 * params.mass * params.omega_sq(t_mid) * x2 + params.coupling * (psi.real**2 + psi.imag**2)
    return np.exp((-1j * h / params.hbar) * v)


def strang_step(field: ComplexField, params: PhysicalParams, t: float, dt: float) -> ComplexField:
    """One Strang step of length ``dt`` starting at time ``t``."""
    if not dt > 0:
        raise ValueError(f"dt must be > 0, got {dt}")
    grid = field.grid
    x2 = grid.x**2
    t_mid = t + 0.5 * dt
    psi = field.psi * _potential_phase(field.psi, params, x2, t_mid, 0.5 * dt)
    kinetic = np.exp((-0.5j * params.hbar * dt / params.mass) * grid.k**2)
    psi = np.fft.ifft(kinetic * np.fft.fft(psi))
    psi = psi * _potential_phase(psi, params, x2, t_mid, 0.5 * dt)
    if not np.all(np.isfinite(psi)):
        raise NumericalBlowupError("non-finite wavefunction", t + dt)
    return ComplexField(psi, t + dt, grid)


def propagate(field: ComplexField, params: PhysicalParams, dt: float, n_steps: int,
              record_every: Optional[int] = None, observer=None) -> ComplexField:
    """Take ``n_steps`` Strang steps from ``field``.

    Adjacent potential half-steps are fused (they commute and leave |psi|
    unchanged), which is equivalent to repeated :func:`strang_step`.
    ``observer(field)`` is called on the initial field and after every
    ``record_every`` steps.
    """
    grid = field.grid
    x2 = grid.x**2
    kinetic = np.exp((-0.5j * params.hbar * dt / params.mass) * grid.k**2)
    t0 = field.t
    psi = field.psi.copy()
    fft, ifft = np.fft.fft, np.fft.ifft

    if observer is not None and record_every:
        observer(ComplexField(psi.copy(), t0, grid))
    if n_steps <= 0:
        return ComplexField(psi, t0, grid)

    psi *= _potential_phase(psi, params, x2, t0 + 0.5 * dt, 0.5 * dt)
    for j in range(n_steps):
        psi = ifft(kinetic * fft(psi))
        t_mid = t0 + (j + 0.5) * dt
        last = j == n_steps - 1
        record = record_every and (j + 1) % record_every == 0
        if last or record:
            psi *= _potential_phase(psi, params, x2, t_mid, 0.5 * dt)
            t_now = t0 + (j + 1) * dt
            if not np.all(np.isfinite(psi)):
                raise NumericalBlowupError("non-finite wavefunction", t_now)
            if record and observer is not None:
                observer(ComplexField(psi.copy(), t_now, grid))
            if not last:
                psi *= _potential_phase(psi, params, x2, t_mid + dt, 0.5 * dt)
        else:
            # fused half-steps at t_mid and t_mid + dt
            w2 = 0.5 * (params.omega_sq(t_mid) + params.omega_sq(t_mid + dt))
            v = 0.5 * params.mass * w2 * x2 + params.coupling * (psi.real**2 + psi.imag**2)
            psi *= np.exp((-1j * dt / params.hbar) * v)
    return ComplexField(psi, t0 + n_steps * dt, grid)


@dataclass(frozen=True)
class MomentSet:
    norm: float
    x_mean: float
    p_mean: float
    velocity: float
    variance: float
    sigma_est: float
    alpha_est: float


def moments(field: ComplexField, params: PhysicalParams, grid: Optional[SpatialGrid] = None) -> MomentSet:
    """Position, momentum and width moments of ``field``."""
    grid = grid or field.grid
    psi = field.psi
    dx = grid.dx
    x = grid.x
    rho = psi.real**2 + psi.imag**2
    norm = float(np.sum(rho) * dx)
    x_mean = float(np.sum(x * rho) * dx / norm)
    variance = float(np.sum((x - x_mean) ** 2 * rho) * dx / norm)
    dpsi = np.fft.ifft(1j * grid.k * np.fft.fft(psi))
    p_mean = float(np.real(np.sum(np.conj(psi) * (-1j * params.hbar) * dpsi)) * dx / norm)
    sigma_est = 2.0 * variance
    alpha_est, _ = alpha_from_sigma(params, sigma_est, 0.0)
    return MomentSet(norm, x_mean, p_mean, p_mean / params.mass, variance, sigma_est, alpha_est)


# --- driver ------------------------------------------------------------------

def uniform_steps(t_end: float, dt: float):
    """Step count and the largest uniform step <= dt that lands on t_end."""
    n = max(1, math.ceil(t_end / dt - 1e-9))
    return n, t_end / n


@dataclass
class PdeRun:
    t: np.ndarray
    moments: List[MomentSet]
    final: ComplexField
    snapshots: List[ComplexField] = field(default_factory=list)

    def column(self, name: str) -> np.ndarray:
        return np.array([getattr(m, name) for m in self.moments])

    def to_csv(self, path) -> None:
        names = ("norm", "x_mean", "p_mean", "variance", "sigma_est", "alpha_est")
        cols = np.column_stack([self.t] + [self.column(n) for n in names])
        np.savetxt(path, cols, delimiter=",", fmt="%.17g", header="t," + ",".join(names), comments="")


def default_record_every(n_steps: int, target: int = 1000) -> int:
    return max(1, n_steps // target)


def run_pde(config: ScenarioConfig, record_every: Optional[int] = None, snapshots: bool = False) -> PdeRun:
    """Propagate the PDE from the Gaussian initial data of ``config``."""
    grid = SpatialGrid.from_spec(config.grid or GridSpec())
    n_steps, dt = uniform_steps(config.t_end, config.dt)
    every = record_every or default_record_every(n_steps)
    params = config.params
    psi0 = init_wavefunction(config.initial, params, grid)
    times, ms = [], []

    def observe(f):
        times.append(f.t)
        ms.append(moments(f, params, grid))

    final = propagate(psi0, params, dt, n_steps, every, observe)
    snaps = [psi0, final] if snapshots else []
    return PdeRun(np.array(times), ms, final, snaps)


@dataclass(frozen=True)
class ComparisonReport:
    t: np.ndarray
    q_ode: np.ndarray
    q_pde: np.ndarray
    sigma_ode: np.ndarray
    sigma_pde: np.ndarray
    I_ode: np.ndarray
    I_pde: np.ndarray
    norm: np.ndarray
    pde: Optional[PdeRun] = field(default=None, repr=False, compare=False)

    @property
    def max_q_deviation(self) -> float:
        return float(np.max(np.abs(self.q_ode - self.q_pde)))

    @property
    def max_sigma_deviation(self) -> float:
        return float(np.max(np.abs(self.sigma_ode - self.sigma_pde)))

    @property
    def max_moment_deviation(self) -> float:
        return max(self.max_q_deviation, self.max_sigma_deviation)

    @property
    def max_norm_error(self) -> float:
        return float(np.max(np.abs(self.norm - 1.0)))

    @property
    def max_I_pde_change(self) -> float:
        finite = self.I_pde[np.isfinite(self.I_pde)]
        return float(np.max(np.abs(finite - finite[0])))

    @property
    def max_I_deviation(self) -> float:
        ok = np.isfinite(self.I_pde)
        return float(np.max(np.abs(self.I_ode[ok] - self.I_pde[ok])))

    def summary(self) -> dict:
        return {
            "max_q_deviation": self.max_q_deviation,
            "max_sigma_deviation": self.max_sigma_deviation,
            "max_I_deviation": self.max_I_deviation,
            "max_I_pde_change": self.max_I_pde_change,
            "max_norm_error": self.max_norm_error,
        }

    def to_csv(self, path) -> None:
        cols = np.column_stack([self.t, self.q_ode, self.q_pde, self.sigma_ode, self.sigma_pde,
                                self.I_ode, self.I_pde, self.norm])
        np.savetxt(path, cols, delimiter=",", fmt="%.17g",
                   header="t,q_ode,q_pde,sigma_ode,sigma_pde,I_ode,I_pde,norm", comments="")


def run_and_compare(config: ScenarioConfig, record_every: Optional[int] = None,
                    snapshots: bool = False) -> ComparisonReport:
    """Propagate the PDE and the reduced equations from the same initial data.

    Both use the same uniform step (the largest one <= ``config.dt`` that
    lands on ``t_end``). The PDE-side invariant uses the moment estimates of
    q, qdot and alpha, with alphadot from a fourth-order difference of the
    alpha estimates; it is NaN at the two samples on each end.

    The underlying :class:`PdeRun` is attached as ``report.pde``.
    """
    n_steps, dt = uniform_steps(config.t_end, config.dt)
    every = record_every or default_record_every(n_steps)
    pde = run_pde(config, every, snapshots)
    ode = integrate(config.with_(dt=dt, method="rk4")).subsample(every)
    m = len(pde.t)
    ode = ode.window(0, m)

    x_mean = pde.column("x_mean")
    vel = pde.column("velocity")
    alpha = pde.column("alpha_est")
    I_pde = np.full(m, np.nan)
    if m >= 5:
        alphadot = central_diff4(alpha, every * dt)
        I_pde[2:-2] = lewis_invariant_arrays(x_mean[2:-2], vel[2:-2], alpha[2:-2], alphadot)

    report = ComparisonReport(
        t=pde.t, q_ode=ode.q, q_pde=x_mean, sigma_ode=ode.sigma, sigma_pde=pde.column("sigma_est"),
        I_ode=ode.I, I_pde=I_pde, norm=pde.column("norm"), pde=pde,
    )
    return report
