"""
Pinning one body at the origin
==============================

Writing Newton's equations in a frame glued to body 1 silently asserts that
body 1 does not accelerate. For two bodies that is false outright; for three
it holds only when the companions have equal masses and sit antipodally.
"""

import numpy as np

from relnbody import NBodyState, bcos3_consistency_check, bcos3_naive_rhs, two_body_bcos_contradiction

# two bodies: the frame would need G m2 r2/|r2|^3 = 0
for r in (1.0, 10.0):
    print(f"two bodies, |r2| = {r:4.1f}: contradiction {two_body_bcos_contradiction(1.0, [r, 0, 0]):.3g}")

# three bodies on a line, body 1 in the middle
r2, r3 = np.array([-1.0, 0, 0]), np.array([1.0, 0, 0])
for m2, m3 in [(4.0, 4.0), (1.0, 2.0)]:
    state = NBodyState.from_arrays([1.0, m2, m3], [[0, 0, 0], r2, r3])
    constraint, a2, a3 = bcos3_naive_rhs(state)
    rep = bcos3_consistency_check(m2, m3, r2, r3)
    print(f"m2={m2}, m3={m3}: body-1 constraint {constraint}, verdict {rep.verdict.value}")

# equal masses but bent geometry still fails
rep = bcos3_consistency_check(3.0, 3.0, r2, [0.0, 1.0, 0.0])
print("equal masses, right angle:", rep.verdict.value)
