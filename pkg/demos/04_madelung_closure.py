#!/usr/bin/env python3
"""Hydrodynamic picture: density, velocity and Bohm potential of the ansatz."""
import numpy as np

from ermakov_lab import GaussianState, PhysicalParams, ScenarioConfig, integrate
from ermakov_lab.madelung import (
    continuity_residual,
    euler_residual,
    field_snapshot,
    quantum_force_check_sampled,
    quantum_force_expectation,
)

params = PhysicalParams(coupling=0.1)
traj = integrate(ScenarioConfig(params, GaussianState(0.0, 1.0, 0.3, 0.8, 0.1), 2.0, 1e-3))
x = np.linspace(-20.0, 20.0, 2048, endpoint=False)

snap = field_snapshot(traj.state(len(traj) // 2), params, x)
peak = np.argmax(snap.rho)
print(f"density peaks at x = {x[peak]:.3f}, V_qu there = {snap.V_qu[peak]:.4f}")

_, cont = continuity_residual(traj, x)
euler = max(max(abs(r.constant), abs(r.linear)) for r in (euler_residual(traj.state(i), params) for i in range(len(traj))))
print(f"continuity residual {np.max(np.abs(cont)):.2e}, Euler residual {euler:.2e}")
print(f"<dV_qu/dx> for the Gaussian: {quantum_force_expectation(traj.state(0), params, x):.2e}")

# a lopsided density: the mean force still vanishes, the force at the mean does not
rho = np.exp(-x**2) + 0.5 * np.exp(-2 * (x - 1.5) ** 2)
rho /= np.trapezoid(rho, x)
check = quantum_force_check_sampled(x, rho, PhysicalParams())
print(f"skewed density: <dV_qu/dx> = {check.expectation:.2e}, dV_qu/dx at <x> = {check.at_mean:.4f}")
