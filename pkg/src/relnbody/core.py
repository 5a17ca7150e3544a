"""Domain types, initial-condition validation and frame bookkeeping.

Bodies are indexed 1..N in input order everywhere in the public API; body 1
is the origin body for every body-centered construction.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np


class SingularityError(ArithmeticError):
    """Raised when a pair separation drops below the collision guard."""

    def __init__(self, pair: tuple[int, int], separation: float):
        self.pair = pair
        self.separation = separation
        super().__init__(
            f"bodies {pair[0]} and {pair[1]} are {separation:.3e} apart "
            "(collision guard)"
        )


class DegeneratePairError(ValueError):
    """A relative coordinate that must be nonzero is exactly zero."""

    def __init__(self, pair: tuple[int, int]):
        self.pair = pair
        super().__init__(f"degenerate pair {pair}: zero difference vector")


class Mode(str, enum.Enum):
    RS1 = "RS1"
    RS2 = "RS2"


class Formulation(str, enum.Enum):
    NCME = "NCME"
    RS1 = "RS1"
    RS2 = "RS2"
    BCOS_REDUCED = "BCOS_REDUCED"


def _frozen(a) -> np.ndarray:
    arr = np.array(a, dtype=np.float64)
    arr.flags.writeable = False
    return arr


def _vec3(v, what: str) -> np.ndarray:
    arr = _frozen(v)
    if arr.shape != (3,):
        raise ValueError(f"{what} must be a 3-vector, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{what} has non-finite components: {arr}")
    return arr


def pair_keys(n: int) -> tuple[tuple[int, int], ...]:
    """All 1-based pairs (j, k), j < k, in row-major order."""
    return tuple((j, k) for j in range(1, n + 1) for k in range(j + 1, n + 1))


@dataclass(frozen=True)
class Body:
    mass: float
    position: np.ndarray
    velocity: np.ndarray

    def __post_init__(self):
        mass = float(self.mass)
        if not np.isfinite(mass) or mass <= 0.0:
            raise ValueError(f"body mass must be finite and > 0, got {self.mass}")
        object.__setattr__(self, "mass", mass)
        object.__setattr__(self, "position", _vec3(self.position, "position"))
        object.__setattr__(self, "velocity", _vec3(self.velocity, "velocity"))


@dataclass(frozen=True)
class NBodyState:
    """Absolute-frame snapshot of N bodies.

    Pairwise separations are not enforced here so that bad initial data can
    still be inspected; use :func:`validate_initial_conditions`.
    """

    bodies: tuple[Body, ...]
    time: float = 0.0
    G: float = 1.0

    def __post_init__(self):
        bodies = tuple(self.bodies)
        if len(bodies) < 1:
            raise ValueError("a state needs at least one body")
        G = float(self.G)
        if not np.isfinite(G) or G <= 0.0:
            raise ValueError(f"G must be finite and > 0, got {self.G}")
        object.__setattr__(self, "bodies", bodies)
        object.__setattr__(self, "G", G)
        object.__setattr__(self, "time", float(self.time))

    @classmethod
    def from_arrays(cls, masses, positions, velocities=None, *, G=1.0, time=0.0):
        positions = np.asarray(positions, dtype=np.float64)
        if velocities is None:
            velocities = np.zeros_like(positions)
        bodies = tuple(
            Body(m, r, v) for m, r, v in zip(masses, positions, np.asarray(velocities, float))
        )
        if len(bodies) != len(masses) or len(bodies) != len(positions):
            raise ValueError("masses, positions and velocities differ in length")
        return cls(bodies, time=time, G=G)

    @property
    def n(self) -> int:
        return len(self.bodies)

    @property
    def masses(self) -> np.ndarray:
        return _frozen([b.mass for b in self.bodies])

    @property
    def positions(self) -> np.ndarray:
        return _frozen([b.position for b in self.bodies])

    @property
    def velocities(self) -> np.ndarray:
        return _frozen([b.velocity for b in self.bodies])

    def translated(self, shift) -> "NBodyState":
        shift = np.asarray(shift, dtype=np.float64)
        return NBodyState.from_arrays(
            self.masses, self.positions + shift, self.velocities, G=self.G, time=self.time
        )


@dataclass(frozen=True)
class RelativeState:
    """Difference coordinates: (1,k) entries for RS1, all (j,k), j<k, for RS2.

    ``positions[i]`` and ``velocities[i]`` belong to ``keys[i]`` and hold
    r_j - r_k and its time derivative.
    """

    mode: Mode
    masses: np.ndarray
    keys: tuple[tuple[int, int], ...]
    positions: np.ndarray
    velocities: np.ndarray
    time: float = 0.0
    G: float = 1.0

    def __post_init__(self):
        mode = Mode(self.mode)
        masses = _frozen(self.masses)
        if masses.ndim != 1 or masses.size < 2:
            raise ValueError("relative states need at least two masses")
        if np.any(~np.isfinite(masses)) or np.any(masses <= 0):
            raise ValueError("masses must be finite and > 0")
        n = masses.size
        keys = tuple((int(j), int(k)) for j, k in self.keys)
        expected = relative_keys(n, mode)
        if keys != expected:
            raise ValueError(f"{mode.value} keys for N={n} must be {expected}, got {keys}")
        pos = _frozen(self.positions).reshape(len(keys), 3)
        vel = _frozen(self.velocities).reshape(len(keys), 3)
        if not (np.all(np.isfinite(pos)) and np.all(np.isfinite(vel))):
            raise ValueError("non-finite difference vectors")
        for key, d in zip(keys, pos):
            if not np.any(d):
                raise DegeneratePairError(key)
        object.__setattr__(self, "mode", mode)
        object.__setattr__(self, "masses", masses)
        object.__setattr__(self, "keys", keys)
        object.__setattr__(self, "positions", pos)
        object.__setattr__(self, "velocities", vel)
        object.__setattr__(self, "time", float(self.time))
        object.__setattr__(self, "G", float(self.G))

    @property
    def n(self) -> int:
        return self.masses.size

    @property
    def diffs(self) -> list[tuple[tuple[int, int], np.ndarray, np.ndarray]]:
        return list(zip(self.keys, self.positions, self.velocities))

    def __getitem__(self, key) -> np.ndarray:
        return self.positions[self.keys.index(tuple(key))]

    def triangle_residual(self) -> float:
        """Max |r_jk - (r_1k - r_1j)| over RS2 pairs with j != 1 (0 for RS1)."""
        if self.mode is Mode.RS1:
            return 0.0
        index = {key: i for i, key in enumerate(self.keys)}
        worst = 0.0
        for (j, k), d in zip(self.keys, self.positions):
            if j == 1:
                continue
            implied = self.positions[index[(1, k)]] - self.positions[index[(1, j)]]
            worst = max(worst, float(np.linalg.norm(d - implied)))
        return worst


def relative_keys(n: int, mode: Mode | str) -> tuple[tuple[int, int], ...]:
    if Mode(mode) is Mode.RS1:
        return tuple((1, k) for k in range(2, n + 1))
    return pair_keys(n)


@dataclass(frozen=True)
class ValidationResult:
    ok: bool
    violating_pairs: tuple[tuple[int, int], ...] = ()
    relative_violations: tuple[tuple[int, int], ...] = ()
    bad_masses: tuple[int, ...] = ()

    def __bool__(self) -> bool:
        return self.ok


def validate_initial_conditions(state: NBodyState) -> ValidationResult:
    """Check masses and pairwise separations of an initial state.

    The absolute check (r_j != r_k) and the relative check on the RS1
    coordinates (r_1k != 0 and r_1k - r_1j != 0) are evaluated
    independently and both reported; they flag the same pairs.
    """
    masses = state.masses
    r = state.positions
    n = state.n
    bad_masses = tuple(i + 1 for i, m in enumerate(masses) if not m > 0)

    absolute = tuple(
        (j, k) for j, k in pair_keys(n) if not np.any(r[j - 1] - r[k - 1])
    )

    d = r[0] - r[1:]  # r_1k for k = 2..N
    relative = []
    for k in range(2, n + 1):
        if not np.any(d[k - 2]):
            relative.append((1, k))
    for j in range(2, n + 1):
        for k in range(j + 1, n + 1):
            if not np.any(d[k - 2] - d[j - 2]):
                relative.append((j, k))

    ok = not absolute and not relative and not bad_masses
    return ValidationResult(ok, absolute, tuple(relative), bad_masses)


def center_of_mass(state: NBodyState) -> np.ndarray:
    m = state.masses
    return m @ state.positions / m.sum()


def to_relative(state: NBodyState, mode: Mode | str) -> RelativeState:
    mode = Mode(mode)
    if state.n < 2:
        raise ValueError("relative coordinates need N >= 2")
    keys = relative_keys(state.n, mode)
    r, v = state.positions, state.velocities
    idx_j = np.array([j - 1 for j, _ in keys])
    idx_k = np.array([k - 1 for _, k in keys])
    return RelativeState(
        mode=mode,
        masses=state.masses,
        keys=keys,
        positions=r[idx_j] - r[idx_k],
        velocities=v[idx_j] - v[idx_k],
        time=state.time,
        G=state.G,
    )


def rs1_to_rs2(rel: RelativeState) -> RelativeState:
    """Expand RS1 coordinates to all pairs via r_jk = r_1k - r_1j."""
    if rel.mode is Mode.RS2:
        return rel
    n = rel.n
    d = np.vstack([np.zeros(3), rel.positions])
    dv = np.vstack([np.zeros(3), rel.velocities])
    keys = pair_keys(n)
    # r_1j stored at d[j-1] (d[0] is r_11 = 0); r_j - r_k = r_1k - r_1j
    pos = np.array([d[k - 1] - d[j - 1] for j, k in keys])
    vel = np.array([dv[k - 1] - dv[j - 1] for j, k in keys])
    return RelativeState(Mode.RS2, rel.masses, keys, pos, vel, rel.time, rel.G)


@dataclass
class Scenario:
    name: str
    bodies: Sequence[Body]
    formulation: Formulation = Formulation.NCME
    t_end: float = 1.0
    G: float = 1.0
    settings: "IntegratorSettings" = field(default=None)  # type: ignore[assignment]
    t0: float = 0.0

    def __post_init__(self):
        from .integrate import IntegratorSettings

        self.bodies = tuple(self.bodies)
        self.formulation = Formulation(self.formulation)
        self.t_end = float(self.t_end)
        self.G = float(self.G)
        if not self.bodies:
            raise ValueError("scenario has no bodies")
        if self.G <= 0:
            raise ValueError("G must be > 0")
        if self.settings is None:
            self.settings = IntegratorSettings()
        if self.formulation is not Formulation.NCME and len(self.bodies) < 2:
            raise ValueError(f"{self.formulation.value} needs at least two bodies")
        if self.t_end <= self.t0:
            raise ValueError("t_end must exceed the start time")

    def initial_state(self) -> NBodyState:
        return NBodyState(tuple(self.bodies), time=self.t0, G=self.G)

