import math

import numpy as np
import pytest

from conftest import scenario
from ermakov_lab import Constant, GaussianState, GridSpec, PhysicalParams, Sinusoidal
from ermakov_lab.core import NumericalBlowupError
from ermakov_lab.gpe import (
    ComplexField,
    GridError,
    SpatialGrid,
    init_wavefunction,
    moments,
    propagate,
    run_and_compare,
    run_pde,
    strang_step,
    uniform_steps,
)
from ermakov_lab.core import ConfigError
from ermakov_lab.numerics import fit_exponent

FREE = PhysicalParams(omega=Constant(0.0))


@pytest.fixture(scope="module")
def grid():
    return SpatialGrid(2048, 40.0)


def test_grid_layout(grid):
    assert grid.dx == 40.0 / 2048
    assert grid.x[0] == -20.0 and grid.x[-1] == pytest.approx(20.0 - grid.dx)
    k = np.sort(grid.k)
    np.testing.assert_allclose(k, np.arange(-1024, 1024) * 2 * math.pi / 40.0)
    with pytest.raises(ConfigError):
        SpatialGrid(300, 10.0)


def test_translation_by_pure_phase(grid):
    psi = init_wavefunction(GaussianState(0, 1.0, 0.3, 1.0, 0.2), PhysicalParams(), grid).psi
    full = np.fft.ifft(np.exp(-1j * grid.k * grid.length) * np.fft.fft(psi))
    np.testing.assert_allclose(full, psi, atol=1e-13)
    shift = 300
    moved = np.fft.ifft(np.exp(-1j * grid.k * shift * grid.dx) * np.fft.fft(psi))
    np.testing.assert_allclose(moved, np.roll(psi, shift), atol=1e-13)


class TestInit:
    def test_real_gaussian(self, grid, unit):
        f = init_wavefunction(GaussianState(0, 0, 0, 1, 0), unit, grid)
        assert np.max(np.abs(f.psi.imag)) == 0.0 and np.all(f.psi.real >= 0)
        m = moments(f, unit)
        assert abs(f.norm() - 1) < 1e-12
        assert abs(m.x_mean) < 1e-12 and abs(m.sigma_est - 1) < 1e-10

    def test_moving_packet(self, grid, unit):
        m = moments(init_wavefunction(GaussianState(0, 0.5, 1.0, 1.0, 0.0), unit, grid), unit)
        assert abs(m.p_mean - 1.0) < 1e-10 and abs(m.velocity - 1.0) < 1e-10

    def test_chirp_leaves_density(self, grid, unit):
        m = moments(init_wavefunction(GaussianState(0, 0, 0, 1.0, 0.5), unit, grid), unit)
        assert abs(m.sigma_est - 1.0) < 1e-10

    def test_moments_reproduce_state(self, grid):
        p = PhysicalParams(hbar=1.0, mass=2.0)
        s = GaussianState(0, 1.0, -0.4, 2.0, 0.25)  # sigma = 2
        m = moments(init_wavefunction(s, p, grid), p)
        assert abs(m.x_mean - 1.0) < 1e-10 and abs(m.sigma_est - 2.0) < 1e-10
        assert abs(m.velocity + 0.4) < 1e-10 and abs(m.alpha_est - 2.0) < 1e-10

    def test_narrow_grid(self, unit):
        with pytest.raises(GridError):
            init_wavefunction(GaussianState(0, 0, 0, 1, 0), unit, SpatialGrid(256, 8.0))


def test_parity(grid, unit):
    f = init_wavefunction(GaussianState(0, 1.3, 0.2, 1.1, 0.1), unit, grid)
    # x_j -> -x_j maps index j to (n - j) mod n on this grid
    mirrored = ComplexField(np.roll(f.psi[::-1], 1), 0.0, grid)
    a, b = moments(f, unit), moments(mirrored, unit)
    assert b.x_mean == pytest.approx(-a.x_mean, abs=1e-12)
    assert b.sigma_est == pytest.approx(a.sigma_est, abs=1e-12)


class TestStrang:
    def test_single_free_step_matches_closed_form(self, grid):
        f0 = init_wavefunction(GaussianState(0, 0, 0, 1, 0), FREE, grid)
        f1 = strang_step(f0, FREE, 0.0, 0.5)
        a, t, x = 1.0, 0.5, grid.x
        exact = (math.pi * a) ** -0.25 * np.sqrt(a / (a + 1j * t)) * np.exp(-x**2 / (2 * (a + 1j * t)))
        assert np.max(np.abs(f1.psi - exact)) < 1e-12
        assert f1.t == 0.5

    def test_fused_equals_repeated_steps(self, grid):
        p = PhysicalParams(coupling=0.5, omega=Sinusoidal(1.0, 0.3, 1.3))
        f = f0 = init_wavefunction(GaussianState(0, 1.0, 0.2, 1.0, 0.1), p, grid)
        for j in range(10):
            f = strang_step(f, p, j * 0.01, 0.01)
        np.testing.assert_allclose(propagate(f0, p, 0.01, 10).psi, f.psi, atol=1e-14)

    def test_norm_over_many_steps(self):
        g = SpatialGrid(256, 20.0)
        p = PhysicalParams(coupling=0.5, omega=Sinusoidal(1.0, 0.3, 1.3))
        f = propagate(init_wavefunction(GaussianState(0, 1, 0, 1, 0), p, g), p, 1e-3, 10_000)
        assert abs(f.norm() - 1) < 1e-11

    def test_second_order(self):
        g = SpatialGrid(256, 20.0)
        p = PhysicalParams(coupling=0.5, omega=Sinusoidal(1.0, 0.3, 1.3))
        f0 = init_wavefunction(GaussianState(0, 1.0, 0.2, 1.0, 0.1), p, g)
        ref = propagate(f0, p, 1 / 2048, 2048).psi
        dts = [1 / 16, 1 / 32, 1 / 64, 1 / 128]
        errs = [np.sqrt(np.sum(np.abs(propagate(f0, p, dt, round(1 / dt)).psi - ref) ** 2) * g.dx)
                for dt in dts]
        assert 1.8 <= fit_exponent(dts, errs) <= 2.2

    def test_blowup(self, grid):
        f = init_wavefunction(GaussianState(0, 0, 0, 1, 0), FREE, grid)
        f.psi[5] = np.nan
        with pytest.raises(NumericalBlowupError):
            strang_step(f, FREE, 0.0, 0.1)


def test_coherent_state_tracks_cosine(unit):
    g = SpatialGrid(512, 40.0)
    f0 = init_wavefunction(GaussianState(0, 1, 0, 1, 0), unit, g)
    ts, xs = [], []
    propagate(f0, unit, 1e-3, 6283, 50, lambda f: (ts.append(f.t), xs.append(moments(f, unit).x_mean)))
    assert np.max(np.abs(np.array(xs) - np.cos(ts))) < 1e-6


def test_grid_doubling_insensitive():
    p = PhysicalParams(coupling=0.2)
    s = GaussianState(0, 1, 0, 1, 0)
    out = []
    for n in (1024, 2048):
        g = SpatialGrid(n, 40.0)
        out.append(moments(propagate(init_wavefunction(s, p, g), p, 1e-3, 1000), p))
    assert abs(out[0].x_mean - out[1].x_mean) < 1e-10
    assert abs(out[0].sigma_est - out[1].sigma_est) < 1e-10


def test_uniform_steps():
    n, dt = uniform_steps(2 * math.pi, 1e-4)
    assert n == 62832 and dt <= 1e-4 and n * dt == pytest.approx(2 * math.pi, rel=1e-15)
    assert uniform_steps(1.0, 0.1) == (10, 0.1)


class TestCompare:
    def test_linear_limit_any_schedule(self):
        cfg = scenario(omega=Sinusoidal(1.0, 0.2, 0.7), q0=1.0, alpha0=1.0, t_end=3.0, dt=1e-3,
                       grid=GridSpec(1024, 40.0))
        rep = run_and_compare(cfg, record_every=20)
        assert rep.max_q_deviation < 1e-6
        assert rep.max_sigma_deviation < 1e-5
        assert rep.max_norm_error < 1e-10

    def test_invariant_through_moments(self):
        cfg = scenario(q0=1.0, t_end=3.0, dt=1e-3, grid=GridSpec(1024, 40.0))
        rep = run_and_compare(cfg, record_every=10)
        assert np.isnan(rep.I_pde[:2]).all() and np.isnan(rep.I_pde[-2:]).all()
        assert rep.max_I_pde_change < 1e-5

    def test_nonlinear_deviation_is_visible(self):
        cfg = scenario(coupling=0.2, q0=1.0, t_end=2.0, dt=1e-3, grid=GridSpec(1024, 40.0))
        rep = run_and_compare(cfg, record_every=20)
        assert rep.max_sigma_deviation > 1e-2
        # the packet centre still follows the trap exactly
        assert rep.max_q_deviation < 1e-6

    def test_csv(self, tmp_path):
        cfg = scenario(coupling=0.1, t_end=0.2, dt=1e-3, grid=GridSpec(256, 20.0))
        rep = run_and_compare(cfg, record_every=10, snapshots=True)
        rep.to_csv(tmp_path / "comparison.csv")
        lines = (tmp_path / "comparison.csv").read_text().splitlines()
        assert lines[0] == "t,q_ode,q_pde,sigma_ode,sigma_pde,I_ode,I_pde,norm"
        assert len(lines) == 22
        rep.pde.snapshots[1].to_csv(tmp_path / "snap.csv")
        assert (tmp_path / "snap.csv").read_text().startswith("x,re_psi,im_psi,rho\n")

    def test_run_pde_records(self):
        cfg = scenario(t_end=0.1, dt=1e-3, grid=GridSpec(256, 20.0))
        run = run_pde(cfg, record_every=25)
        np.testing.assert_allclose(run.t, [0, 0.025, 0.05, 0.075, 0.1])
