"""Conic-section oracle for (modified) Kepler trajectories."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

CIRCULAR_ECCENTRICITY = 1e-8


class ConicDomainError(ValueError):
    pass


@dataclass(frozen=True)
class ConicParams:
    """r(theta) = e d / (1 + e cos theta), theta measured from periapsis.

    ``e d`` is the semi-latus rectum. For a circle (e = 0) the product
    vanishes, so ``d`` then holds the radius itself.
    """

    e: float
    d: float
    mu_eff: float
    periapsis_dir: np.ndarray = None  # type: ignore[assignment]
    normal_dir: np.ndarray = None  # type: ignore[assignment]

    def __post_init__(self):
        if self.e < 0:
            raise ValueError("eccentricity must be >= 0")
        if not self.d > 0:
            raise ValueError("conic scale d must be > 0")
        p = np.array([1.0, 0.0, 0.0]) if self.periapsis_dir is None else np.asarray(self.periapsis_dir, float)
        n = np.array([0.0, 0.0, 1.0]) if self.normal_dir is None else np.asarray(self.normal_dir, float)
        object.__setattr__(self, "periapsis_dir", p)
        object.__setattr__(self, "normal_dir", n)

    @property
    def semi_latus_rectum(self) -> float:
        return self.d if self.e == 0 else self.e * self.d

    @property
    def plane_basis(self) -> tuple[np.ndarray, np.ndarray]:
        return self.periapsis_dir, np.cross(self.normal_dir, self.periapsis_dir)

    def max_true_anomaly(self) -> float:
        return np.pi if self.e < 1 else float(np.arccos(-1.0 / self.e))

    def true_anomaly(self, r) -> np.ndarray:
        p, q = self.plane_basis
        r = np.atleast_2d(r)
        return np.arctan2(r @ q, r @ p)


def conic_radius(params: ConicParams, theta):
    theta = np.asarray(theta, dtype=float)
    denom = 1.0 + params.e * np.cos(theta)
    wrapped = (theta + np.pi) % (2 * np.pi) - np.pi
    if params.e >= 1 and np.any(np.abs(wrapped) >= params.max_true_anomaly()):
        raise ConicDomainError(f"theta outside the open branch of an e={params.e} conic")
    if np.any(denom <= 0):
        raise ConicDomainError("1 + e cos(theta) must be positive")
    out = params.semi_latus_rectum / denom
    return float(out) if out.ndim == 0 else out


def conic_from_state(r, v, mu_eff: float) -> ConicParams:
    """Conic through (r, v) under -mu_eff r/|r|^3, from the angular momentum and
    eccentricity (Laplace-Runge-Lenz) vectors, which encode the energy."""
    r = np.asarray(r, dtype=float)
    v = np.asarray(v, dtype=float)
    if not mu_eff > 0:
        raise ValueError("mu_eff must be > 0")
    h = np.cross(r, v)
    hn = np.linalg.norm(h)
    if hn == 0:
        raise ValueError("radial motion has no conic")
    rn = np.linalg.norm(r)
    # |evec| equals sqrt(1 + 2 E h^2 / mu^2) but keeps full precision near e = 0
    evec = np.cross(v, h) / mu_eff - r / rn
    e = float(np.linalg.norm(evec))
    p = hn**2 / mu_eff
    normal = h / hn
    if e <= CIRCULAR_ECCENTRICITY:
        return ConicParams(0.0, p, mu_eff, r / rn, normal)
    return ConicParams(e, p / e, mu_eff, evec / e, normal)


@dataclass(frozen=True)
class ConicFit:
    params: ConicParams
    radial_residual: float
    plane_residual: float


def fit_conic(positions, velocities, mu_eff: float, plane_tol: float = 1e-6) -> ConicFit:
    """Fit the conic fixed by the first sample and measure how well the rest follow.

    The residual is max |(|r| - r_conic(theta)| / p over samples, with p the
    semi-latus rectum. Samples in directions an open conic never reaches
    make the residual infinite.
    """
    x = np.asarray(positions, dtype=float).reshape(-1, 3)
    v = np.asarray(velocities, dtype=float).reshape(-1, 3)
    params = conic_from_state(x[0], v[0], mu_eff)
    scale = float(np.max(np.linalg.norm(x, axis=1)))
    plane = float(np.max(np.abs(x @ params.normal_dir)))
    if plane > plane_tol * scale:
        raise ValueError(f"trajectory is not planar (out-of-plane {plane:.3e})")
    theta = params.true_anomaly(x)
    radius = np.linalg.norm(x, axis=1)
    reachable = 1.0 + params.e * np.cos(theta) > 0
    if params.e >= 1:
        reachable &= np.abs(theta) < params.max_true_anomaly()
    if not reachable.all():
        return ConicFit(params, float("inf"), plane)
    model = conic_radius(params, theta)
    residual = float(np.max(np.abs(radius - model)) / params.semi_latus_rectum)
    return ConicFit(params, residual, plane)


def fit_trajectory(traj, key, mu_eff: float, plane_tol: float = 1e-6) -> ConicFit:
    _, pos, vel = traj.series(key)
    return fit_conic(pos, vel, mu_eff, plane_tol)
