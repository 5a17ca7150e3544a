"""Fixed-step RK4 and adaptive Dormand-Prince propagation with a collision guard."""

from __future__ import annotations

import enum
from dataclasses import dataclass, replace
from typing import Callable, Sequence

import numpy as np

from .core import (
    Formulation,
    Mode,
    NBodyState,
    RelativeState,
    Scenario,
    SingularityError,
    pair_keys,
    relative_keys,
    to_relative,
    validate_initial_conditions,
)
from .dynamics import ncme_acc, reduced_acc, rs1_acc, rs2_acc
from .invariants import InvariantReport, invariant_report


class Termination(str, enum.Enum):
    REACHED_T_END = "ReachedTEnd"
    COLLISION_GUARD = "CollisionGuard"
    MAX_STEPS = "MaxSteps"


class InvalidInitialConditions(ValueError):
    def __init__(self, pairs):
        self.pairs = tuple(pairs)
        super().__init__(f"invalid initial conditions, coincident pairs: {list(self.pairs)}")


@dataclass(frozen=True)
class IntegratorSettings:
    method: str = "RK45"
    dt: float = 1e-3
    rel_tol: float = 1e-10
    abs_tol: float = 1e-12
    max_steps: int = 1_000_000
    collision_guard: float | None = None
    sample_interval: float | None = None

    def __post_init__(self):
        method = str(self.method).upper()
        if method not in ("RK4", "RK45"):
            raise ValueError(f"unknown method {self.method!r} (RK4 or RK45)")
        object.__setattr__(self, "method", method)
        for name in ("dt", "rel_tol", "abs_tol"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be > 0")
        if not int(self.max_steps) > 0:
            raise ValueError("max_steps must be > 0")
        object.__setattr__(self, "max_steps", int(self.max_steps))
        if self.collision_guard is not None and not self.collision_guard > 0:
            raise ValueError("collision_guard must be > 0")
        if self.sample_interval is not None and not self.sample_interval > 0:
            raise ValueError("sample_interval must be > 0")


# --- steppers ---------------------------------------------------------------


def rk4_step(f: Callable, y: np.ndarray, t: float, dt: float, k1: np.ndarray | None = None):
    """One classical fourth-order Runge-Kutta step of y' = f(t, y)."""
    if k1 is None:
        k1 = f(t, y)
    k2 = f(t + dt / 2, y + dt / 2 * k1)
    k3 = f(t + dt / 2, y + dt / 2 * k2)
    k4 = f(t + dt, y + dt * k3)
    return y + dt / 6 * (k1 + 2 * k2 + 2 * k3 + k4)


# Dormand-Prince 5(4)
_C = np.array([0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1, 1])
_A = [
    [],
    [1 / 5],
    [3 / 40, 9 / 40],
    [44 / 45, -56 / 15, 32 / 9],
    [19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729],
    [9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656],
    [35 / 384, 0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84],
]
_B5 = np.array([35 / 384, 0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0])
_B4 = np.array(
    [5179 / 57600, 0, 7571 / 16695, 393 / 640, -92097 / 339200, 187 / 2100, 1 / 40]
)
_E = _B5 - _B4


def dopri_step(f: Callable, t: float, y: np.ndarray, k1: np.ndarray, h: float):
    """Returns (y_new, error_estimate, f(t + h, y_new))."""
    K = [k1]
    for s in range(1, 6):
        acc = sum(a * k for a, k in zip(_A[s], K))
        K.append(f(t + _C[s] * h, y + h * acc))
    y_new = y + h * sum(b * k for b, k in zip(_B5[:6], K))
    k7 = f(t + h, y_new)
    K.append(k7)
    err = h * sum(e * k for e, k in zip(_E, K))
    return y_new, err, k7


def _error_norm(err, y, y_new, rtol, atol) -> float:
    scale = atol + rtol * np.maximum(np.abs(y), np.abs(y_new))
    return float(np.sqrt(np.mean((err / scale) ** 2)))


def _initial_step(f, t, y, k1, rtol, atol, direction) -> float:
    # Hairer, Norsett & Wanner, Solving ODEs I, II.4
    scale = atol + rtol * np.abs(y)
    d0 = np.sqrt(np.mean((y / scale) ** 2))
    d1 = np.sqrt(np.mean((k1 / scale) ** 2))
    h0 = 1e-6 if d0 < 1e-5 or d1 < 1e-5 else 0.01 * d0 / d1
    k2 = f(t + direction * h0, y + direction * h0 * k1)
    d2 = np.sqrt(np.mean(((k2 - k1) / scale) ** 2)) / h0
    if max(d1, d2) <= 1e-15:
        h1 = max(1e-6, h0 * 1e-3)
    else:
        h1 = (0.01 / max(d1, d2)) ** (1 / 5)
    return min(100 * h0, h1)


@dataclass
class ODEResult:
    times: np.ndarray
    states: np.ndarray
    termination: Termination
    accepted: int
    rejected: int
    singularity: SingularityError | None = None


def integrate_ode(
    f: Callable,
    t0: float,
    y0,
    t_end: float,
    *,
    method: str = "RK45",
    dt: float = 1e-3,
    rel_tol: float = 1e-10,
    abs_tol: float = 1e-12,
    max_steps: int = 1_000_000,
    sample_times: Sequence[float] | None = None,
    step_check: Callable[[np.ndarray, np.ndarray], None] | None = None,
) -> ODEResult:
    """Integrate y' = f(t, y) from t0 to t_end (t_end > t0).

    Steps are shortened to land exactly on ``sample_times``; only those
    times (plus t0) are recorded. Without ``sample_times`` every accepted
    step is recorded. A SingularityError raised by ``f`` is treated as the
    collision guard: RK4 stops at once, RK45 retries with smaller steps and
    stops once the step can no longer shrink. A state whose right-hand side
    trips the guard is never recorded. ``step_check(y_old, y_new)`` may
    raise SingularityError to veto an otherwise accepted step.
    """
    method = method.upper()
    y = np.array(y0, dtype=float)
    t = float(t0)
    times = [t]
    states = [y.copy()]
    targets = list(sample_times) if sample_times is not None else [t_end]
    if not targets or targets[-1] < t_end:
        targets.append(t_end)
    record_all = sample_times is None
    ti = 0
    accepted = rejected = 0

    try:
        k1 = f(t, y)
    except SingularityError as exc:
        return ODEResult(np.array(times), np.array(states), Termination.COLLISION_GUARD, 0, 0, exc)

    if method == "RK45":
        h = _initial_step(f, t, y, k1, rel_tol, abs_tol, 1.0)
    else:
        h = float(dt)

    def finish(reason, exc=None):
        return ODEResult(np.array(times), np.array(states), reason, accepted, rejected, exc)

    while ti < len(targets):
        target = targets[ti]
        if accepted + rejected >= max_steps:
            return finish(Termination.MAX_STEPS)
        span = target - t
        clipped = h >= span * (1 - 1e-12)
        step = span if clipped else h

        if method == "RK4":
            try:
                y_new = rk4_step(f, y, t, step, k1)
                k_next = f(t + step, y_new)
            except SingularityError as exc:
                return finish(Termination.COLLISION_GUARD, exc)
        else:
            try:
                y_new, err, k_next = dopri_step(f, t, y, k1, step)
            except SingularityError as exc:
                rejected += 1
                h = step / 4
                if h <= 16 * np.finfo(float).eps * max(1.0, abs(t)):
                    return finish(Termination.COLLISION_GUARD, exc)
                continue
            en = _error_norm(err, y, y_new, rel_tol, abs_tol)
            if not np.isfinite(en):
                en = np.inf
            if en > 1.0:
                rejected += 1
                h = step * max(0.2, 0.9 * en ** (-0.2))
                if h <= 16 * np.finfo(float).eps * max(1.0, abs(t)):
                    return finish(Termination.COLLISION_GUARD)
                continue
            grow = 5.0 if en == 0 else min(5.0, max(0.2, 0.9 * en ** (-0.2)))
            h_next = step * grow
            # a step shortened to hit a sample time must not shrink the next one
            h = max(h_next, h) if clipped else h_next

        if step_check is not None:
            try:
                step_check(y, y_new)
            except SingularityError as exc:
                return finish(Termination.COLLISION_GUARD, exc)
        accepted += 1
        t = target if clipped else t + step
        y, k1 = y_new, k_next
        if clipped:
            ti += 1
        if clipped or record_all:
            times.append(t)
            states.append(y.copy())
    return finish(Termination.REACHED_T_END)


# --- formulations -----------------------------------------------------------


@dataclass(frozen=True)
class Trajectory:
    formulation: Formulation
    keys: tuple
    masses: np.ndarray
    G: float
    times: np.ndarray
    positions: np.ndarray  # (samples, K, 3)
    velocities: np.ndarray  # (samples, K, 3)
    termination: Termination
    guard: float
    accepted_steps: int = 0
    rejected_steps: int = 0
    reports: tuple[InvariantReport, ...] | None = None
    guard_pair: tuple[int, int] | None = None

    def __len__(self) -> int:
        return self.times.size

    @property
    def n(self) -> int:
        return self.masses.size

    def series(self, key):
        i = self.keys.index(key)
        return self.times, self.positions[:, i], self.velocities[:, i]

    def state(self, i: int) -> NBodyState | RelativeState:
        """Sample ``i`` as an absolute state (NCME) or a relative one.

        Body-centered samples come back as RS1 states holding r_1k = -r_k.
        """
        t = float(self.times[i])
        pos, vel = self.positions[i], self.velocities[i]
        if self.formulation is Formulation.NCME:
            return NBodyState.from_arrays(self.masses, pos, vel, G=self.G, time=t)
        if self.formulation is Formulation.BCOS_REDUCED:
            return RelativeState(Mode.RS1, self.masses, relative_keys(self.n, Mode.RS1), -pos, -vel, t, self.G)
        mode = Mode(self.formulation.value)
        return RelativeState(mode, self.masses, self.keys, pos, vel, t, self.G)

    def reached_end(self) -> bool:
        return self.termination is Termination.REACHED_T_END


def initial_variables(state: NBodyState, formulation: Formulation):
    """(keys, positions, velocities) integrated by ``formulation``."""
    formulation = Formulation(formulation)
    r, v = state.positions, state.velocities
    if formulation is Formulation.NCME:
        return tuple(range(1, state.n + 1)), r.copy(), v.copy()
    if formulation is Formulation.BCOS_REDUCED:
        return tuple(range(2, state.n + 1)), r[1:] - r[0], v[1:] - v[0]
    rel = to_relative(state, Mode(formulation.value))
    return rel.keys, rel.positions.copy(), rel.velocities.copy()


def acceleration_function(formulation: Formulation, masses, G: float, guard: float):
    formulation = Formulation(formulation)
    m = np.asarray(masses, dtype=float)
    if formulation is Formulation.NCME:
        return lambda x: ncme_acc(x, m, G, guard)
    if formulation is Formulation.RS1:
        return lambda x: rs1_acc(x, m, G, guard)
    if formulation is Formulation.RS2:
        return lambda x: rs2_acc(x, m, G, guard)
    return lambda x: -reduced_acc(-x, m, G, guard)


def pair_vectors(formulation: Formulation, x: np.ndarray) -> np.ndarray:
    """All r_j - r_k (j < k, row-major) from one formulation's variables."""
    formulation = Formulation(formulation)
    if formulation is Formulation.RS2:
        return x
    if formulation is Formulation.NCME:
        pts = x
    elif formulation is Formulation.BCOS_REDUCED:
        pts = np.vstack([np.zeros(3), x])
    else:
        pts = np.vstack([np.zeros(3), -x])
    iu, ju = np.triu_indices(pts.shape[0], 1)
    return pts[iu] - pts[ju]


def min_separation(formulation: Formulation, x: np.ndarray) -> float:
    return float(np.min(np.linalg.norm(pair_vectors(formulation, x), axis=1)))


def swept_min_separation(formulation: Formulation, x0: np.ndarray, x1: np.ndarray):
    """Closest approach of every pair along the straight segment x0 -> x1.

    A fixed step can carry two bodies through each other without any stage
    landing near the collision; the segment catches that. Returns
    ``(distance, pair_index)``.
    """
    d0 = pair_vectors(formulation, x0)
    delta = pair_vectors(formulation, x1) - d0
    dd = np.einsum("ij,ij->i", delta, delta)
    s = np.clip(-np.einsum("ij,ij->i", d0, delta) / np.where(dd > 0, dd, 1.0), 0.0, 1.0)
    dist = np.linalg.norm(d0 + s[:, None] * delta, axis=1)
    i = int(np.argmin(dist))
    return float(dist[i]), i


def _sample_times(t0, t_end, interval):
    if interval is None:
        return None
    count = int(np.floor((t_end - t0) / interval + 1e-9))
    ts = [t0 + i * interval for i in range(1, count + 1)]
    if ts and t_end - ts[-1] <= 1e-12 * max(1.0, abs(t_end)):
        ts[-1] = t_end
    return ts


def propagate(
    scenario: Scenario,
    settings: IntegratorSettings | None = None,
    *,
    report_invariants: bool = False,
) -> Trajectory:
    """Integrate the scenario's formulation from t0 to t_end.

    The run stops at t_end, when a separation falls to the collision guard,
    or when the step budget is spent; the reason is recorded on the result.
    """
    settings = settings or scenario.settings
    state = scenario.initial_state()
    check = validate_initial_conditions(state)
    if not check.ok:
        raise InvalidInitialConditions(check.violating_pairs or check.relative_violations)

    form = scenario.formulation
    keys, x0, v0 = initial_variables(state, form)
    K = len(keys)
    guard = settings.collision_guard
    if guard is None:
        guard = 1e-8 * min_separation(form, x0)
    acc = acceleration_function(form, state.masses, state.G, guard)

    def f(t, y):
        x = y[: 3 * K].reshape(K, 3)
        return np.concatenate([y[3 * K :], acc(x).ravel()])

    pairs = pair_keys(state.n)

    def swept(y_old, y_new):
        d, i = swept_min_separation(
            form, y_old[: 3 * K].reshape(K, 3), y_new[: 3 * K].reshape(K, 3)
        )
        if d <= guard:
            raise SingularityError(pairs[i], d)

    y0 = np.concatenate([x0.ravel(), v0.ravel()])
    res = integrate_ode(
        f,
        scenario.t0,
        y0,
        scenario.t_end,
        method=settings.method,
        dt=settings.dt,
        rel_tol=settings.rel_tol,
        abs_tol=settings.abs_tol,
        max_steps=settings.max_steps,
        sample_times=_sample_times(scenario.t0, scenario.t_end, settings.sample_interval),
        step_check=swept,
    )
    S = res.states.shape[0]
    traj = Trajectory(
        formulation=form,
        keys=keys,
        masses=state.masses,
        G=state.G,
        times=res.times,
        positions=res.states[:, : 3 * K].reshape(S, K, 3),
        velocities=res.states[:, 3 * K :].reshape(S, K, 3),
        termination=res.termination,
        guard=guard,
        accepted_steps=res.accepted,
        rejected_steps=res.rejected,
        guard_pair=res.singularity.pair if res.singularity is not None else None,
    )
    if report_invariants and state.n >= 2:
        reports = tuple(invariant_report(traj.state(i)) for i in range(S))
        traj = replace(traj, reports=reports)
    return traj


# --- closed-form solution of r'' = A(t) -----------------------------------


def double_integral_solution(
    A: Callable[[float], np.ndarray], r0, v0, t0: float, t: float, intervals: int = 1024
) -> np.ndarray:
    """r(t) = r0 + v0 (t - t0) + int_{t0}^{t} int_{t0}^{s} A(u) du ds.

    Both integrals use composite Simpson on a shared grid: the inner one is
    accumulated at every outer node, the outer one runs over those nodes.
    Exact for polynomial A of degree <= 2, fourth order in the step beyond.
    """
    r0 = np.asarray(r0, dtype=float)
    v0 = np.asarray(v0, dtype=float)
    if t == t0:
        return r0.copy()
    if intervals < 2 or intervals % 2:
        raise ValueError("intervals must be a positive even number")
    u = np.linspace(t0, t, 2 * intervals + 1)
    h = (t - t0) / (2 * intervals)
    a = np.array([np.asarray(A(ui), dtype=float) for ui in u]).reshape(u.size, -1)
    panels = h / 3 * (a[0:-1:2] + 4 * a[1::2] + a[2::2])
    inner = np.vstack([np.zeros((1, a.shape[1])), np.cumsum(panels, axis=0)])
    H = 2 * h
    outer = H / 3 * (inner[0] + inner[-1] + 4 * inner[1:-1:2].sum(axis=0) + 2 * inner[2:-1:2].sum(axis=0))
    return r0 + v0 * (t - t0) + outer.reshape(r0.shape)
