#!/usr/bin/env python3
"""The Ermakov-Lewis invariant of a linear trapped packet stays put, even when the trap breathes."""
import numpy as np

from ermakov_lab import Constant, GaussianState, PhysicalParams, ScenarioConfig, Sinusoidal, integrate

start = GaussianState(t=0.0, q=1.0, qdot=0.0, alpha=1.0, alphadot=0.0)

for omega in (Constant(1.0), Sinusoidal(1.0, 0.2, 0.7)):
    traj = integrate(ScenarioConfig(PhysicalParams(omega=omega), start, t_end=20.0, dt=1e-3))
    print(f"{omega}")
    print(f"  I(0) = {traj.I[0]:.15f}   max |I - I(0)| = {np.max(np.abs(traj.I - traj.I[0])):.2e}")
    print(f"  q swings in [{traj.q.min():+.3f}, {traj.q.max():+.3f}], alpha in [{traj.alpha.min():.3f}, {traj.alpha.max():.3f}]")

# q and alpha both wander, yet the combination does not
