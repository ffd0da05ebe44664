import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import scenario
from ermakov_lab import (
    Constant,
    DomainError,
    GaussianState,
    LinearRamp,
    PhysicalParams,
    Sinusoidal,
    drift_report,
    drift_rhs,
    integrate,
    lewis_invariant,
)
from ermakov_lab.numerics import StencilError, fit_exponent

finite = st.floats(-50, 50)
positive = st.floats(1e-3, 50)


def test_invariant_examples():
    assert lewis_invariant(GaussianState(0, 1, 0, 1, 0)) == 0.5
    assert lewis_invariant(GaussianState(0, 0, 0, 3.7, 1.2)) == 0.0
    for t in np.linspace(0, 10, 21):
        s = GaussianState(t, math.cos(t), -math.sin(t), 1.0, 0.0)
        assert lewis_invariant(s) == pytest.approx(0.5, abs=1e-15)


def test_invariant_domain():
    with pytest.raises(DomainError):
        lewis_invariant(GaussianState(0, 1, 0, 0, 0))


@given(finite, finite, positive, finite)
def test_invariant_non_negative(q, qdot, alpha, alphadot):
    assert lewis_invariant(GaussianState(0, q, qdot, alpha, alphadot)) >= 0


@given(finite, finite, positive, finite, st.floats(-10, 10))
def test_invariant_scale_covariance(q, qdot, alpha, alphadot, lam):
    base = lewis_invariant(GaussianState(0, q, qdot, alpha, alphadot))
    scaled = lewis_invariant(GaussianState(0, lam * q, lam * qdot, alpha, alphadot))
    assert scaled == pytest.approx(lam * lam * base, rel=1e-12, abs=1e-300)


def test_drift_examples():
    assert drift_rhs(GaussianState(0, 1.3, -0.2, 0.7, 0.4), PhysicalParams()) == 0.0
    assert drift_rhs(GaussianState(0, 0, 1, 1, 0), PhysicalParams(coupling=1.0)) == 0.0
    assert drift_rhs(GaussianState(0, 1, 1, 1, 0), PhysicalParams(coupling=1.0)) == pytest.approx(
        2 / math.sqrt(math.pi), abs=1e-15)


@given(finite, positive, finite, st.floats(-3, 3))
def test_drift_vanishes_when_ratio_is_stationary(q, alpha, c, g):
    # qdot alpha = q alphadot makes d/dt(q/alpha) vanish even for g != 0
    alphadot = c
    qdot = q * alphadot / alpha
    assert abs(drift_rhs(GaussianState(0, q, qdot, alpha, alphadot), PhysicalParams(coupling=g))) < 1e-9 * (
        1 + abs(q * alphadot))


def test_static_ratio_trajectory_conserves_invariant():
    # no trap and alpha = 1/G is an equilibrium with q/alpha constant
    p = PhysicalParams(coupling=0.5, omega=Constant(0.0))
    a0 = 1.0 / p.interaction_strength
    cfg = scenario(coupling=0.5, omega=Constant(0.0), q0=0.5, alpha0=a0, t_end=5.0, dt=1e-2)
    rep = drift_report(integrate(cfg), p)
    assert rep.max_abs_invariant_change < 1e-12


def test_conserved_harmonic():
    tr = integrate(scenario(t_end=20.0, dt=1e-3))
    rep = drift_report(tr, PhysicalParams())
    assert rep.max_abs_invariant_change < 1e-9
    assert rep.max_abs_residual < 1e-9


def test_drift_law_along_trajectory():
    p = PhysicalParams(coupling=0.1)
    rep = drift_report(integrate(scenario(coupling=0.1, t_end=20.0, dt=1e-3)), p)
    assert rep.max_abs_residual < 1e-6
    assert rep.max_abs_invariant_change > 1e-3  # invariant really drifts


def test_centre_at_rest_keeps_invariant():
    p = PhysicalParams(coupling=0.1)
    rep = drift_report(integrate(scenario(coupling=0.1, q0=0.0, alpha0=0.8, t_end=20.0, dt=1e-3)), p)
    assert rep.max_abs_invariant_change < 1e-10


@pytest.mark.parametrize("omega", [Constant(1.0), Sinusoidal(1.0, 0.2, 0.7), LinearRamp(1.0, 0.05)])
def test_conservation_error_is_fourth_order(omega):
    # O(dt**4): at least fourth order (constant trap converges slightly faster)
    dts = [0.02, 0.01, 0.005]
    errs = [drift_report(integrate(scenario(omega=omega, alpha0=0.9, t_end=10.0, dt=dt)),
                         PhysicalParams(omega=omega)).max_abs_invariant_change for dt in dts]
    assert fit_exponent(dts, errs) >= 3.7


def test_drift_residual_is_fourth_order():
    p = PhysicalParams(coupling=0.1)
    dts = [0.04, 0.02, 0.01, 0.005]
    res = [drift_report(integrate(scenario(coupling=0.1, t_end=20.0, dt=dt)), p).max_abs_residual
           for dt in dts]
    assert 3.7 <= fit_exponent(dts, res) <= 4.3


def test_report_shape_and_io(tmp_path):
    p = PhysicalParams(coupling=0.1)
    tr = integrate(scenario(coupling=0.1, t_end=1.0, dt=0.01))
    rep = drift_report(tr, p)
    assert rep.residual.size == len(tr) - 4
    np.testing.assert_array_equal(rep.t, tr.t[2:-2])
    rep.to_csv(tmp_path / "drift.csv")
    rep.write_summary(tmp_path / "drift_summary.txt")
    assert (tmp_path / "drift.csv").read_text().startswith("t,I,dIdt_numeric,dIdt_analytic,residual\n")
    summary = dict(line.split("=") for line in (tmp_path / "drift_summary.txt").read_text().split())
    assert float(summary["max_abs_residual"]) == rep.max_abs_residual


def test_non_uniform_samples_rejected():
    tr = integrate(scenario(coupling=0.1, t_end=1.0, dt=0.3))  # short final step
    with pytest.raises(StencilError):
        drift_report(tr, PhysicalParams(coupling=0.1))
