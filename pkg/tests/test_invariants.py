import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from relnbody import (
    Mode,
    NBodyState,
    Verdict,
    bcos3_consistency_check,
    invariant_report,
    motion_identity,
    restlessness_check,
    t_sum_check,
    to_relative,
    translation_invariance_residual,
    two_body_bcos_contradiction,
)
from relnbody.invariants import default_threshold, self_term_sum, t_sum_closed, t_sum_direct

from _corpus import equilateral, random_state

seeds = st.integers(0, 2**32 - 1)


def state(masses, positions, G=1.0):
    return NBodyState.from_arrays(masses, positions, G=G)


def test_identity_equilateral_hand_value():
    lhs, rhs, res = motion_identity(equilateral())
    assert rhs == pytest.approx(-9.0, rel=1e-14)
    assert lhs == pytest.approx(-9.0, rel=1e-13)
    assert res <= 1e-13


def test_identity_two_body_hand_value():
    lhs, rhs, _ = motion_identity(state([1, 1], [[0, 0, 0], [1, 0, 0]]))
    assert rhs == -2.0
    assert lhs == pytest.approx(-2.0, rel=1e-15)


def test_t_sum_equilateral_hand_value():
    direct, closed, res = t_sum_check(equilateral())
    assert closed == pytest.approx(-3.0, rel=1e-14)
    assert direct == pytest.approx(-3.0, rel=1e-13)


def test_t_sum_needs_three_bodies():
    with pytest.raises(ValueError):
        t_sum_check(state([1, 1], [[0, 0, 0], [1, 0, 0]]))


@pytest.mark.parametrize("mode", [Mode.RS1, Mode.RS2])
def test_identity_same_from_relative_states(mode):
    s = random_state(np.random.default_rng(3), 5)
    lhs, rhs, _ = motion_identity(s)
    rlhs, rrhs, res = motion_identity(to_relative(s, mode))
    assert rrhs == pytest.approx(rhs, rel=1e-13)
    assert rlhs == pytest.approx(lhs, rel=1e-10)
    assert res <= 1e-10


@settings(max_examples=50, deadline=None)
@given(seeds, st.integers(3, 8))
def test_lhs_splits_into_self_terms_and_t_sum(seed, n):
    s = random_state(np.random.default_rng(seed), n)
    lhs, rhs, _ = motion_identity(s)
    parts = self_term_sum(s) + t_sum_direct(s)
    assert abs(lhs - parts) <= 1e-10 * abs(rhs)


@settings(max_examples=50, deadline=None)
@given(seeds, st.integers(2, 6), st.floats(0.1, 10), st.floats(0.1, 10))
def test_identity_scaling(seed, n, lam, mu):
    # rhs is homogeneous: degree 3 in the masses, degree -1 in lengths
    s = random_state(np.random.default_rng(seed), n)
    _, rhs, _ = motion_identity(s)
    scaled = state(mu * s.masses, lam * s.positions)
    _, rhs2, res = motion_identity(scaled)
    assert rhs2 == pytest.approx(rhs * mu**3 / lam, rel=1e-12)
    assert res <= 1e-10


@settings(max_examples=50, deadline=None)
@given(seeds, st.integers(3, 6), st.floats(0.1, 10))
def test_t_sum_scales_like_identity(seed, n, lam):
    s = random_state(np.random.default_rng(seed), n)
    scaled = state(s.masses, lam * s.positions)
    assert t_sum_closed(scaled) == pytest.approx(t_sum_closed(s) / lam, rel=1e-12)


@pytest.mark.parametrize(
    "m2, m3, r2, r3, verdict",
    [
        (4, 4, [-1, 0, 0], [1, 0, 0], Verdict.CONSISTENT),
        (1, 2, [-1, 0, 0], [1, 0, 0], Verdict.INCONSISTENT_MASS_RATIO),
        (3, 3, [-1, 0, 0], [0, 1, 0], Verdict.INCONSISTENT_GEOMETRY),
        (3, 3, [-1, 0, 0], [2, 0, 0], Verdict.INCONSISTENT_GEOMETRY),
    ],
)
def test_bcos3_verdicts(m2, m3, r2, r3, verdict):
    report = bcos3_consistency_check(m2, m3, r2, r3)
    assert report.verdict is verdict
    if verdict is Verdict.CONSISTENT:
        assert report.constraint_residual <= 1e-15


def test_bcos3_unequal_mass_constraint_magnitude():
    report = bcos3_consistency_check(1.0, 2.0, [-1, 0, 0], [1, 0, 0])
    assert report.constraint_residual == pytest.approx(1.0, rel=1e-15)
    assert report.as_dict()["verdict"] == "InconsistentMassRatio"


@settings(max_examples=100, deadline=None)
@given(
    st.floats(1e-3, 1e3),
    st.lists(st.floats(-10, 10), min_size=3, max_size=3).filter(lambda v: np.linalg.norm(v) > 1e-3),
)
def test_bcos3_equal_antipodal_always_consistent(m, r):
    r = np.array(r)
    report = bcos3_consistency_check(m, m, r, -r)
    assert report.verdict is Verdict.CONSISTENT
    assert report.constraint_residual <= 1e-12 * m / np.linalg.norm(r) ** 2


@pytest.mark.parametrize("m2, r2, expected", [(1, [1, 0, 0], 1.0), (1, [0, 10, 0], 0.01)])
def test_two_body_contradiction(m2, r2, expected):
    assert two_body_bcos_contradiction(m2, r2) == pytest.approx(expected, rel=1e-15)


def test_restlessness_equilateral():
    res = restlessness_check(equilateral())
    assert len(res.restless_pairs) == 3
    assert res.accelerating_bodies == 3
    assert res.bound_ok


def test_restlessness_two_body():
    # |a_1| = |a_2| = 1 and |r_12''| = 2; the default floor is exactly 1
    s = state([1, 1], [[0, 0, 0], [1, 0, 0]])
    res = restlessness_check(s)
    assert res.threshold == 1.0
    assert res.restless_pairs == ((1, 2),)
    assert restlessness_check(s, delta=0.5).accelerating_bodies == 2
    assert res.bound_lhs == pytest.approx(2.0)
    assert res.bound_rhs == 2.0


def test_restlessness_explicit_threshold_above_everything():
    res = restlessness_check(equilateral(), delta=1e6)
    assert res.restless_pairs == ()
    assert res.accelerating_bodies == 0


@settings(max_examples=60, deadline=None)
@given(seeds, st.integers(2, 8))
def test_some_pair_always_restless(seed, n):
    s = random_state(np.random.default_rng(seed), n)
    res = restlessness_check(s)
    assert res.bound_ok
    assert len(res.restless_pairs) >= 1
    assert res.threshold == pytest.approx(default_threshold(s))


@settings(max_examples=60, deadline=None)
@given(seeds, st.integers(2, 8))
def test_weight_sum_threshold_also_leaves_a_restless_pair(seed, n):
    s = random_state(np.random.default_rng(seed), n)
    iu, ju = np.triu_indices(n, 1)
    w = s.masses[iu] * s.masses[ju] * np.linalg.norm(s.positions[iu] - s.positions[ju], axis=1)
    _, rhs, _ = motion_identity(s)
    assert restlessness_check(s, delta=0.5 * abs(rhs) / w.sum()).restless_pairs


def test_antipodal_has_two_accelerating_bodies():
    s = state([1, 4, 4], [[0, 0, 0], [-1, 0, 0], [1, 0, 0]])
    assert restlessness_check(s).accelerating_bodies >= 2


@pytest.mark.parametrize("mode", [Mode.RS1, Mode.RS2])
def test_accelerating_bodies_same_from_relative_states(mode):
    s = random_state(np.random.default_rng(12), 6)
    a = restlessness_check(s)
    b = restlessness_check(to_relative(s, mode))
    assert a.accelerating_bodies == b.accelerating_bodies
    assert a.restless_pairs == b.restless_pairs


def test_translation_zero_shift_is_exact():
    s = random_state(np.random.default_rng(2), 4)
    assert translation_invariance_residual(s, np.zeros(3)) == 0.0


@pytest.mark.parametrize(
    "shift", [np.array([1e3, -2e2, 5.0]), lambda t: np.array([t**2, 2 * t, 1.0])]
)
def test_translation_invariance(shift):
    rng = np.random.default_rng(21)
    for n in (2, 4, 6):
        s = random_state(rng, n, time=1.7)
        assert translation_invariance_residual(s, shift) <= 1e-9


def test_invariant_report_fields():
    rep = invariant_report(equilateral())
    assert rep.negativity_ok and rep.bound_ok
    assert rep.identity_residual <= 1e-13
    assert rep.t_sum_residual <= 1e-13
    d = rep.as_dict()
    assert d["accelerating_bodies"] == 3
    assert len(d["restless_pairs"]) == 3
