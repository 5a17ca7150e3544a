"""Seeded random valid states shared by the property and acceptance tests."""

import numpy as np

from relnbody import NBodyState


def random_state(rng, n, *, box=10.0, min_sep=0.1, mass_range=(0.1, 10.0), G=1.0, time=0.0):
    """Uniform positions in [-box, box]^3 with every separation >= min_sep."""
    while True:
        r = rng.uniform(-box, box, size=(n, 3))
        iu, ju = np.triu_indices(n, 1)
        if n < 2 or np.linalg.norm(r[iu] - r[ju], axis=1).min() >= min_sep:
            break
    m = rng.uniform(*mass_range, size=n)
    v = rng.uniform(-1, 1, size=(n, 3))
    return NBodyState.from_arrays(m, r, v, G=G, time=time)


def corpus(count=1000, seed=20240601, sizes=range(2, 9)):
    rng = np.random.default_rng(seed)
    sizes = list(sizes)
    return [random_state(rng, sizes[i % len(sizes)]) for i in range(count)]


def equilateral(side=1.0, masses=(1.0, 1.0, 1.0), G=1.0):
    h = np.sqrt(3) / 2 * side
    r = np.array([[0, 0, 0], [side, 0, 0], [side / 2, h, 0]], dtype=float)
    return NBodyState.from_arrays(masses, r, G=G)


def planetary(masses, radii, phases, tilts, G=1.0):
    """Primary at rest at the origin plus bodies on circular orbits about it."""
    from relnbody import Body

    bodies = [Body(masses[0], [0, 0, 0], [0, 0, 0])]
    for m, a, ph, i in zip(masses[1:], radii, phases, tilts):
        pos = a * np.array([np.cos(ph), np.sin(ph) * np.cos(i), np.sin(ph) * np.sin(i)])
        vel = np.sqrt(G * masses[0] / a) * np.array(
            [-np.sin(ph), np.cos(ph) * np.cos(i), np.cos(ph) * np.sin(i)]
        )
        bodies.append(Body(m, pos, vel))
    return bodies
