"""
A relative constant of motion
=============================

For any configuration, sum_{j<k} m_j m_k (r_j - r_k).(r_j - r_k)'' equals
-G M sum_{j<k} m_j m_k / |r_j - r_k|, which is strictly negative. So the
relative accelerations never all vanish: the system is never at rest.
"""

import numpy as np

from relnbody import Mode, NBodyState, motion_identity, restlessness_check, t_sum_check, to_relative

rng = np.random.default_rng(3)
for n in (2, 3, 5, 8):
    state = NBodyState.from_arrays(rng.uniform(0.1, 10, n), rng.uniform(-10, 10, (n, 3)))
    lhs, rhs, res = motion_identity(state)
    line = f"N={n}: lhs {lhs: .6e}  rhs {rhs: .6e}  residual {res:.1e}"
    if n >= 3:
        line += f"  T-sum residual {t_sum_check(state)[2]:.1e}"
    print(line)

# the same numbers from RS2 data alone
rel = to_relative(state, Mode.RS2)
print("from RS2 only:", motion_identity(rel)[1])

rest = restlessness_check(state)
print(f"threshold {rest.threshold:.3e}: {len(rest.restless_pairs)} restless pairs,"
      f" {rest.accelerating_bodies} accelerating bodies, bound ok {rest.bound_ok}")
