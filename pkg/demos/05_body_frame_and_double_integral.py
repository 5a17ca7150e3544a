"""
Moving frames and the double integral
=====================================

Viewed from body 1, each body feels the ordinary Newton field plus the
fictitious acceleration -a_1. And once the acceleration A(t) along a path
is known, r(t) follows by integrating twice.
"""

import numpy as np

from relnbody import NBodyState, body_frame_residual, double_integral_solution, integrate_ode

rng = np.random.default_rng(8)
state = NBodyState.from_arrays(rng.uniform(0.5, 3, 6), rng.uniform(-4, 4, (6, 3)))
print("body-frame residual per body:", body_frame_residual(state))

print("A = 6t      ->", double_integral_solution(lambda t: [6 * t, 0, 0], [0, 0, 0], [0, 0, 0], 0.0, 2.0))
print("A = 0, v0   ->", double_integral_solution(lambda t: np.zeros(3), [1, 2, 3], [4, 5, 6], 0.0, 2.0))


def A(t):
    return np.array([np.sin(t), np.cos(2 * t), t * np.exp(-t)])


r0, v0 = np.array([1.0, 0, -1]), np.array([0, 0.5, 0.2])
closed = double_integral_solution(A, r0, v0, 0.0, 4.0)
ode = integrate_ode(lambda t, y: np.r_[y[3:], A(t)], 0.0, np.r_[r0, v0], 4.0, rel_tol=1e-12, abs_tol=1e-14)
print("double integral:", closed)
print("RK45           :", ode.states[-1, :3])
