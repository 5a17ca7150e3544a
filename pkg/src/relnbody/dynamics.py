"""Right-hand sides for the absolute, relative and body-centered systems.

All kernels visit each unordered pair once, store the pair term in an
antisymmetric (N, N, 3) table and contract it with the masses in a fixed
order, so results are exactly antisymmetric and bit-reproducible.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import Mode, NBodyState, RelativeState, SingularityError


@dataclass(frozen=True)
class AccelerationSet:
    """Accelerations keyed like the state they came from.

    Keys are body indices (1-based ints) for absolute formulations and
    (j, k) pairs for relative ones.
    """

    keys: tuple
    values: np.ndarray

    def __post_init__(self):
        vals = np.array(self.values, dtype=np.float64).reshape(len(self.keys), 3)
        vals.flags.writeable = False
        object.__setattr__(self, "keys", tuple(self.keys))
        object.__setattr__(self, "values", vals)

    def __getitem__(self, key) -> np.ndarray:
        if isinstance(key, (list, np.ndarray)):
            key = tuple(key)
        return self.values[self.keys.index(key)]

    def __len__(self) -> int:
        return len(self.keys)

    def as_dict(self) -> dict:
        return dict(zip(self.keys, self.values))

    def scale(self) -> float:
        return float(np.max(np.linalg.norm(self.values, axis=1))) if len(self) else 0.0


def inverse_cube_table(x: np.ndarray, guard: float = 0.0) -> np.ndarray:
    """Antisymmetric table F[i, j] = (x_j - x_i) / |x_j - x_i|^3.

    Raises SingularityError (1-based indices) if any separation is <= guard.
    """
    n = x.shape[0]
    F = np.zeros((n, n, 3))
    iu, ju = np.triu_indices(n, 1)
    if iu.size == 0:
        return F
    d = x[ju] - x[iu]
    r = np.sqrt(np.einsum("ij,ij->i", d, d))
    bad = np.nonzero(~(r > guard))[0]
    if bad.size:
        p = bad[np.argmin(r[bad])]
        raise SingularityError((int(iu[p]) + 1, int(ju[p]) + 1), float(r[p]))
    f = d / (r * r * r)[:, None]
    F[iu, ju] = f
    F[ju, iu] = -f
    return F


def _field(x: np.ndarray, masses: np.ndarray, G: float, guard: float) -> np.ndarray:
    # a_i = G sum_j m_j (x_j - x_i)/|x_j - x_i|^3
    F = inverse_cube_table(x, guard)
    return G * np.einsum("j,ijk->ik", masses, F)


def ncme_acc(x: np.ndarray, masses: np.ndarray, G: float, guard: float = 0.0) -> np.ndarray:
    return _field(x, masses, G, guard)


def rs1_acc(d: np.ndarray, masses: np.ndarray, G: float, guard: float = 0.0) -> np.ndarray:
    """(r_1 - r_k)'' for k = 2..N from d[k-2] = r_1 - r_k alone.

    Uses r_i - r_k = (r_1 - r_k) - (r_1 - r_i); the points -d_k play the role
    of positions seen from body 1, and body 1 itself sits at the zero vector.
    """
    pts = np.vstack([np.zeros((1, 3)), -d])
    a = _field(pts, masses, G, guard)
    return a[0] - a[1:]


def rs2_acc(
    D: np.ndarray, masses: np.ndarray, G: float, guard: float = 0.0
) -> np.ndarray:
    """(r_j - r_k)'' for every stored pair, D in row-major (j, k), j < k, order.

    Only the stored pairs are used: R[j, k] = D_jk and R[k, j] = -D_jk.
    """
    n = masses.size
    iu, ju = np.triu_indices(n, 1)
    r = np.sqrt(np.einsum("ij,ij->i", D, D))
    bad = np.nonzero(~(r > guard))[0]
    if bad.size:
        p = bad[np.argmin(r[bad])]
        raise SingularityError((int(iu[p]) + 1, int(ju[p]) + 1), float(r[p]))
    # F[a, b] = (r_a - r_b)/|r_a - r_b|^3
    f = D / (r * r * r)[:, None]
    F = np.zeros((n, n, 3))
    F[iu, ju] = f
    F[ju, iu] = -f
    # S_j = sum_i m_i (r_i - r_j)/|.|^3 ; (r_j - r_k)'' = G (S_j - S_k)
    S = -G * np.einsum("i,jik->jk", masses, F)
    return S[iu] - S[ju]


def reduced_acc(d: np.ndarray, masses: np.ndarray, G: float, guard: float = 0.0) -> np.ndarray:
    """Body-centered system with r_1 = 0, returned as (r_1k)'' = -r_k''.

    Evaluated term by term from the explicit body-centered form, not through
    the shared field kernel, so it serves as an independent check on RS1.
    """
    r = -d  # positions of bodies 2..N seen from body 1
    m = masses
    n = m.size
    rn = np.sqrt(np.einsum("ij,ij->i", r, r))
    bad = np.nonzero(~(rn > guard))[0]
    if bad.size:
        p = bad[np.argmin(rn[bad])]
        raise SingularityError((1, int(p) + 2), float(rn[p]))
    pull = r / (rn**3)[:, None]  # r_i / |r_i|^3
    common = G * (m[1:] @ pull)
    out = np.empty_like(r)
    for k in range(n - 1):
        s = np.zeros(3)
        for i in range(n - 1):
            if i == k:
                continue
            dik = r[i] - r[k]
            sep = np.sqrt(dik @ dik)
            if not sep > guard:
                a, b = sorted((i + 2, k + 2))
                raise SingularityError((a, b), float(sep))
            s += m[i + 1] * dik / sep**3
        out[k] = common + G * m[0] * pull[k] - G * s
    return out


# --- public evaluators ----------------------------------------------------


def nbody_accelerations(state: NBodyState, guard: float = 0.0) -> AccelerationSet:
    a = ncme_acc(state.positions, state.masses, state.G, guard)
    return AccelerationSet(tuple(range(1, state.n + 1)), a)


def _require(rel: RelativeState, mode: Mode):
    if rel.mode is not mode:
        raise ValueError(f"expected a {mode.value} state, got {rel.mode.value}")


def rs1_rhs(rel: RelativeState, guard: float = 0.0) -> AccelerationSet:
    _require(rel, Mode.RS1)
    return AccelerationSet(rel.keys, rs1_acc(rel.positions, rel.masses, rel.G, guard))


def rs2_rhs(rel: RelativeState, guard: float = 0.0) -> AccelerationSet:
    _require(rel, Mode.RS2)
    return AccelerationSet(rel.keys, rs2_acc(rel.positions, rel.masses, rel.G, guard))


def reduced_bcos_rhs(rel: RelativeState, guard: float = 0.0) -> AccelerationSet:
    """RS1 with body 1 pinned at the origin; stored (1,k) entries are -r_k.

    Values are (r_1k)'' = -r_k''; negate to read body accelerations.
    """
    _require(rel, Mode.RS1)
    return AccelerationSet(rel.keys, reduced_acc(rel.positions, rel.masses, rel.G, guard))


def bcos3_naive_rhs(state: NBodyState, guard: float = 0.0):
    """Newton's equations for three bodies with body 1 forced to the origin.

    Returns ``(constraint, a2, a3)``. ``constraint`` is the right side of the
    body-1 equation, G m2 r2/|r2|^3 + G m3 r3/|r3|^3, which the frame choice
    forces to equal the zero vector.
    """
    if state.n != 3:
        raise ValueError("the naive body-centered system is defined for N = 3")
    r = state.positions
    if np.any(r[0]) or np.any(state.velocities[0]):
        raise ValueError("body 1 must sit at the origin at rest")
    m, G = state.masses, state.G
    r2, r3 = r[1], r[2]
    n2, n3 = np.linalg.norm(r2), np.linalg.norm(r3)
    n23 = np.linalg.norm(r3 - r2)
    for pair, sep in (((1, 2), n2), ((1, 3), n3), ((2, 3), n23)):
        if not sep > guard:
            raise SingularityError(pair, float(sep))
    constraint = G * m[1] * r2 / n2**3 + G * m[2] * r3 / n3**3
    a2 = -G * m[0] * r2 / n2**3 + G * m[2] * (r3 - r2) / n23**3
    a3 = -G * m[0] * r3 / n3**3 + G * m[1] * (r2 - r3) / n23**3
    return constraint, a2, a3


def body_frame_residual(state: NBodyState, guard: float = 0.0) -> np.ndarray:
    """Per-body residual of the body-1-frame transform of Newton's equations.

    With r~_i = r_i - r_1 and a~_i = a_i - a_1, compares a_1 + a~_i against the
    field evaluated purely from the body-frame positions r~.
    """
    if state.n < 2:
        raise ValueError("body-frame residual needs N >= 2")
    r, m, G = state.positions, state.masses, state.G
    a = ncme_acc(r, m, G, guard)
    a_tilde = a - a[0]
    r_tilde = r - r[0]
    frame = _field(r_tilde, m, G, guard)
    return np.linalg.norm((a[0] + a_tilde) - frame, axis=1)
