"""Relative constant-of-motion identity, body-centered consistency and
restlessness checks.

Every check accepts either an absolute :class:`NBodyState` or a
:class:`RelativeState`. Absolute states get their pair accelerations from
the brute-force Newton kernel; relative states from the RS2 right-hand side,
so relative trajectories never need absolute positions.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Callable, Union

import numpy as np

from .core import (
    Mode,
    NBodyState,
    RelativeState,
    SingularityError,
    pair_keys,
    rs1_to_rs2,
    to_relative,
)
from .dynamics import ncme_acc, rs1_acc, rs2_acc

State = Union[NBodyState, RelativeState]

RESIDUAL_FLOOR = 1e-300
MASS_TOL = 1e-9
GEOMETRY_TOL = 1e-9


@dataclass(frozen=True)
class _Pairs:
    masses: np.ndarray
    G: float
    keys: tuple
    sep: np.ndarray  # (P, 3) r_j - r_k
    acc: np.ndarray  # (P, 3) (r_j - r_k)''
    body_acc: np.ndarray | None  # (N, 3) when the state is absolute


def _pairs(state: State, guard: float = 0.0) -> _Pairs:
    keys = pair_keys(state.n)
    if isinstance(state, NBodyState):
        r = state.positions
        a = ncme_acc(r, state.masses, state.G, guard)
        iu, ju = np.triu_indices(state.n, 1)
        return _Pairs(state.masses, state.G, keys, r[iu] - r[ju], a[iu] - a[ju], a)
    rel = state
    if rel.mode is Mode.RS1:
        acc1 = rs1_acc(rel.positions, rel.masses, rel.G, guard)
        full = rs1_to_rs2(rel)
        # r_jk'' = r_1k'' - r_1j'' (r_11'' = 0)
        a1 = np.vstack([np.zeros(3), acc1])
        acc = np.array([a1[k - 1] - a1[j - 1] for j, k in keys])
        return _Pairs(rel.masses, rel.G, keys, full.positions, acc, None)
    acc = rs2_acc(rel.positions, rel.masses, rel.G, guard)
    return _Pairs(rel.masses, rel.G, keys, rel.positions, acc, None)


def _pair_mass_products(m: np.ndarray):
    iu, ju = np.triu_indices(m.size, 1)
    return m[iu] * m[ju], iu, ju


def _relative(lhs: float, rhs: float) -> float:
    return abs(lhs - rhs) / max(abs(rhs), RESIDUAL_FLOOR)


def identity_rhs(masses: np.ndarray, G: float, sep: np.ndarray) -> float:
    """-G M sum_{j<k} m_j m_k / |r_j - r_k|."""
    mm, _, _ = _pair_mass_products(masses)
    dist = np.linalg.norm(sep, axis=1)
    return float(-G * masses.sum() * np.sum(mm / dist))


def motion_identity(state: State, guard: float = 0.0) -> tuple[float, float, float]:
    """Both sides of the relative constant-of-motion identity.

    lhs is sum_{j<k} m_j m_k (r_j - r_k).(r_j - r_k)'' with accelerations from
    the force kernels; rhs is the closed form -G M sum m_j m_k/|r_j - r_k|.
    Returns ``(lhs, rhs, |lhs - rhs|/|rhs|)``.
    """
    if state.n < 2:
        raise ValueError("the identity needs N >= 2")
    p = _pairs(state, guard)
    mm, _, _ = _pair_mass_products(p.masses)
    lhs = float(np.sum(mm * np.einsum("ij,ij->i", p.sep, p.acc)))
    rhs = identity_rhs(p.masses, p.G, p.sep)
    return lhs, rhs, _relative(lhs, rhs)


def _separation_table(state: State) -> np.ndarray:
    """R[a, b] = r_a - r_b for all ordered pairs (0-based)."""
    n = state.n
    if isinstance(state, NBodyState):
        r = state.positions
        return r[:, None, :] - r[None, :, :]
    full = rs1_to_rs2(state) if state.mode is Mode.RS1 else state
    R = np.zeros((n, n, 3))
    iu, ju = np.triu_indices(n, 1)
    R[iu, ju] = full.positions
    R[ju, iu] = -full.positions
    return R


def t_sum_direct(state: State) -> float:
    """sum_{j<k} T(j,k), each T evaluated from its defining triple sum."""
    m, G, n = np.asarray(state.masses), state.G, state.n
    R = _separation_table(state)
    total = 0.0
    for j in range(n):
        for k in range(j + 1, n):
            rjk = R[j, k]
            inner = 0.0
            for i in range(n):
                if i == j or i == k:
                    continue
                rij = R[i, j]
                rik = R[i, k]
                inner += m[i] * (
                    rjk @ rij / np.linalg.norm(rij) ** 3
                    - rjk @ rik / np.linalg.norm(rik) ** 3
                )
            total += G * m[j] * m[k] * inner
    return float(total)


def t_sum_closed(state: State) -> float:
    """-G sum_{j<k} (M - m_j - m_k) m_j m_k / |r_j - r_k|."""
    m = np.asarray(state.masses)
    mm, iu, ju = _pair_mass_products(m)
    R = _separation_table(state)
    dist = np.linalg.norm(R[iu, ju], axis=1)
    return -state.G * float(np.sum((m.sum() - m[iu] - m[ju]) * mm / dist))


def t_sum_check(state: State) -> tuple[float, float, float]:
    if state.n < 3:
        raise ValueError("the T-sum check needs N >= 3")
    direct = t_sum_direct(state)
    closed = t_sum_closed(state)
    return direct, closed, _relative(direct, closed)


def self_term_sum(state: State) -> float:
    """sum_{j<k} -G m_j m_k (m_j + m_k)/|r_j - r_k|, the non-T part of the lhs."""
    m = np.asarray(state.masses)
    mm, iu, ju = _pair_mass_products(m)
    R = _separation_table(state)
    dist = np.linalg.norm(R[iu, ju], axis=1)
    return -state.G * float(np.sum(mm * (m[iu] + m[ju]) / dist))


# --- body-centered analysis -------------------------------------------------


class Verdict(str, enum.Enum):
    CONSISTENT = "Consistent"
    INCONSISTENT_MASS_RATIO = "InconsistentMassRatio"
    INCONSISTENT_GEOMETRY = "InconsistentGeometry"


@dataclass(frozen=True)
class ConsistencyReport:
    verdict: Verdict
    mass_residual: float
    geometry_residual: float
    constraint_residual: float

    def as_dict(self) -> dict:
        return {
            "verdict": self.verdict.value,
            "mass_residual": self.mass_residual,
            "geometry_residual": self.geometry_residual,
            "constraint_residual": self.constraint_residual,
        }


def bcos3_consistency_check(m2, m3, r2, r3, *, mass_tol=MASS_TOL, geometry_tol=GEOMETRY_TOL):
    """Can three bodies be described with body 1 pinned at the origin?

    Requires equal companion masses and the antipodal placement
    r2 = -sqrt(m2/m3) r3. ``constraint_residual`` is the norm of the
    body-1 equation m2 r2/|r2|^3 + m3 r3/|r3|^3 that the frame forces to zero.
    """
    r2 = np.asarray(r2, dtype=float)
    r3 = np.asarray(r3, dtype=float)
    n2, n3 = np.linalg.norm(r2), np.linalg.norm(r3)
    if n2 == 0 or n3 == 0:
        raise ValueError("companion positions must be nonzero")
    mass_residual = abs(m2 - m3) / max(m2, m3)
    geometry_residual = float(np.linalg.norm(r2 + np.sqrt(m2 / m3) * r3))
    constraint = float(np.linalg.norm(m2 * r2 / n2**3 + m3 * r3 / n3**3))
    if mass_residual > mass_tol:
        verdict = Verdict.INCONSISTENT_MASS_RATIO
    elif geometry_residual > geometry_tol * max(n2, n3):
        verdict = Verdict.INCONSISTENT_GEOMETRY
    else:
        verdict = Verdict.CONSISTENT
    return ConsistencyReport(verdict, float(mass_residual), geometry_residual, constraint)


def two_body_bcos_contradiction(m2: float, r2, G: float = 1.0) -> float:
    """|G m2 r2/|r2|^3|, which a body-1-centered frame would force to zero."""
    r2 = np.asarray(r2, dtype=float)
    n = np.linalg.norm(r2)
    if n == 0:
        raise ValueError("r2 must be nonzero")
    return float(np.linalg.norm(G * m2 * r2 / n**3))


# --- restlessness -----------------------------------------------------------


def default_threshold(state: State, guard: float = 0.0) -> float:
    """Floor below which a relative acceleration may be called zero.

    From the identity and Cauchy-Schwarz, max_jk |(r_j - r_k)''| is at least
    |rhs| / (P * w_max) with weights w_jk = m_j m_k |r_j - r_k| over P pairs;
    half of that is a threshold some pair must exceed.
    """
    p = _pairs(state, guard)
    mm, _, _ = _pair_mass_products(p.masses)
    w = mm * np.linalg.norm(p.sep, axis=1)
    rhs = identity_rhs(p.masses, p.G, p.sep)
    return float(abs(rhs) / (2 * len(p.keys) * w.max()))


@dataclass(frozen=True)
class RestlessnessResult:
    restless_pairs: tuple[tuple[int, int], ...]
    accelerating_bodies: int
    bound_ok: bool
    bound_lhs: float
    bound_rhs: float
    threshold: float


def _inertial_accelerations(state: State, guard: float = 0.0) -> np.ndarray:
    # a_i = G sum_j m_j (r_j - r_i)/|r_j - r_i|^3 needs only the differences
    R = _separation_table(state)
    m = np.asarray(state.masses)
    dist = np.linalg.norm(R, axis=2)
    np.fill_diagonal(dist, np.inf)
    if np.any(~(dist > guard)):
        j, k = np.unravel_index(np.argmin(dist), dist.shape)
        raise SingularityError((int(min(j, k)) + 1, int(max(j, k)) + 1), float(dist[j, k]))
    return state.G * np.einsum("j,jik->ik", m, R / dist[:, :, None] ** 3)


def restlessness_check(state: State, delta: float | None = None, guard: float = 0.0):
    """Which relative accelerations are nonzero, and how many bodies move.

    ``accelerating_bodies`` counts inertial accelerations |a_i| > delta.
    These depend only on pair differences, so relative states yield the same
    count without any absolute positions.
    """
    p = _pairs(state, guard)
    if delta is None:
        delta = default_threshold(state, guard)
    norms = np.linalg.norm(p.acc, axis=1)
    restless = tuple(key for key, a in zip(p.keys, norms) if a > delta)
    body_acc = p.body_acc if p.body_acc is not None else _inertial_accelerations(state, guard)
    accelerating = int(np.sum(np.linalg.norm(body_acc, axis=1) > delta))
    mm, _, _ = _pair_mass_products(p.masses)
    bound_lhs = float(np.sum(mm * np.linalg.norm(p.sep, axis=1) * norms))
    bound_rhs = abs(identity_rhs(p.masses, p.G, p.sep))
    # exact in real arithmetic; allow rounding in the summation
    bound_ok = bool(bound_lhs >= bound_rhs * (1 - 1e-12))
    return RestlessnessResult(restless, accelerating, bound_ok, bound_lhs, bound_rhs, delta)


# --- translation invariance -------------------------------------------------


def translation_invariance_residual(
    state: NBodyState, shift: np.ndarray | Callable[[float], np.ndarray]
) -> float:
    """Worst normalized change of the RS1 and RS2 right-hand sides under a shift.

    ``shift`` is a constant vector or a curve c(t) sampled at ``state.time``.
    """
    c = shift(state.time) if callable(shift) else shift
    c = np.asarray(c, dtype=float)
    moved = state.translated(c)
    worst = 0.0
    for mode, fn in ((Mode.RS1, rs1_acc), (Mode.RS2, rs2_acc)):
        a = to_relative(state, mode)
        b = to_relative(moved, mode)
        base = fn(a.positions, a.masses, a.G)
        other = fn(b.positions, b.masses, b.G)
        err = np.linalg.norm(other - base, axis=1) / np.maximum(
            1.0, np.linalg.norm(base, axis=1)
        )
        worst = max(worst, float(err.max()))
    return worst


# --- per-sample report ------------------------------------------------------


@dataclass(frozen=True)
class InvariantReport:
    time: float
    identity_lhs: float
    identity_rhs: float
    identity_residual: float
    t_sum: float
    t_sum_closed: float
    restless_pairs: tuple = field(default=())
    accelerating_bodies: int = 0
    negativity_ok: bool = True
    bound_ok: bool = True

    @property
    def t_sum_residual(self) -> float:
        return _relative(self.t_sum, self.t_sum_closed) if self.t_sum_closed else abs(self.t_sum)

    def as_dict(self) -> dict:
        return {
            "time": self.time,
            "identity_lhs": self.identity_lhs,
            "identity_rhs": self.identity_rhs,
            "identity_residual": self.identity_residual,
            "t_sum": self.t_sum,
            "t_sum_closed": self.t_sum_closed,
            "restless_pairs": [list(p) for p in self.restless_pairs],
            "accelerating_bodies": self.accelerating_bodies,
            "negativity_ok": self.negativity_ok,
            "bound_ok": self.bound_ok,
        }


def invariant_report(state: State, delta: float | None = None, guard: float = 0.0) -> InvariantReport:
    lhs, rhs, res = motion_identity(state, guard)
    if state.n >= 3:
        ts, tc = t_sum_direct(state), t_sum_closed(state)
    else:
        ts = tc = 0.0
    rest = restlessness_check(state, delta, guard)
    return InvariantReport(
        time=state.time,
        identity_lhs=lhs,
        identity_rhs=rhs,
        identity_residual=res,
        t_sum=ts,
        t_sum_closed=tc,
        restless_pairs=rest.restless_pairs,
        accelerating_bodies=rest.accelerating_bodies,
        negativity_ok=bool(rhs < 0),
        bound_ok=rest.bound_ok,
    )
