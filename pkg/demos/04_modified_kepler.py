"""
The modified Kepler problem
===========================

The relative coordinate of two bodies obeys a Kepler problem with
mu = G (m1 + m2), not G m1. The reduced three-body antipodal configuration
gives another one, with mu = G (m1 + m3/4).
"""

import numpy as np

from relnbody import Body, Formulation, IntegratorSettings, Scenario, fit_trajectory, propagate
from relnbody.scenarios import bundled

m1, m2 = 1.0, 0.5
mu = m1 + m2
e = 0.5
v = np.sqrt(mu * (1 + e))  # periapsis speed at r = 1
period = 2 * np.pi * np.sqrt((1 / (1 - e)) ** 3 / mu)
sc = Scenario("eccentric", [Body(m1, [1, 0, 0], [0, v, 0]), Body(m2, [0, 0, 0], [0, 0, 0])],
              Formulation.RS1, period, settings=IntegratorSettings(sample_interval=period / 200))
traj = propagate(sc)
for label, trial in (("G(m1+m2)", mu), ("G m1", m1)):
    fit = fit_trajectory(traj, (1, 2), trial)
    print(f"mu = {label:9s}: e = {fit.params.e:.9f}, radial residual {fit.radial_residual:.3g}")

traj = propagate(bundled("bcos3_antipodal"))
print("antipodal |r2 + r3| max:", np.abs(traj.positions[:, 0] + traj.positions[:, 1]).max())
for key in traj.keys:
    fit = fit_trajectory(traj, key, 1.0 + 4.0 / 4)
    print(f"body {key}: e = {fit.params.e:.2e}, radius {fit.params.semi_latus_rectum:.12f},"
          f" residual {fit.radial_residual:.2e}")
