import numpy as np
import pytest

from ermakov_lab import GaussianState, PhysicalParams, ScenarioConfig


@pytest.fixture
def unit():
    return PhysicalParams()


@pytest.fixture
def rng():
    return np.random.default_rng(20261014)


def scenario(coupling=0.0, omega=None, q0=1.0, qdot0=0.0, alpha0=1.0, alphadot0=0.0,
             t_end=20.0, dt=1e-3, **kw):
    params = PhysicalParams(coupling=coupling, **({"omega": omega} if omega is not None else {}))
    return ScenarioConfig(params, GaussianState(0.0, q0, qdot0, alpha0, alphadot0), t_end, dt, **kw)


ACCEPTANCE_LINES = []


@pytest.fixture
def criterion():
    """Record one acceptance line: criterion(name, value, bound, ok)."""

    def record(name, measured, bound, ok):
        ACCEPTANCE_LINES.append(f"{'PASS' if ok else 'FAIL'}  {name}: measured {measured} (required {bound})")
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
