import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from relnbody import (
    Body,
    DegeneratePairError,
    Mode,
    NBodyState,
    RelativeState,
    center_of_mass,
    rs1_to_rs2,
    to_relative,
    validate_initial_conditions,
)

from _corpus import random_state


def state(masses, positions, velocities=None):
    return NBodyState.from_arrays(masses, positions, velocities)


def test_body_rejects_zero_mass():
    with pytest.raises(ValueError):
        Body(0.0, [0, 0, 0], [0, 0, 0])
    with pytest.raises(ValueError):
        Body(1.0, [0, np.nan, 0], [0, 0, 0])


def test_state_is_immutable():
    s = state([1, 1], [[1, 0, 0], [-1, 0, 0]])
    with pytest.raises(ValueError):
        s.positions[0, 0] = 5.0
    with pytest.raises(Exception):
        s.G = 2.0


@pytest.mark.parametrize(
    "positions, pairs",
    [
        ([[1, 0, 0], [-1, 0, 0]], ()),
        ([[0, 0, 0], [0, 0, 0]], ((1, 2),)),
    ],
)
def test_validate_two_bodies(positions, pairs):
    result = validate_initial_conditions(state([1, 1], positions))
    assert result.ok is (not pairs)
    assert result.violating_pairs == pairs


def test_validate_flags_pair_on_both_sides():
    s = state([1, 1, 1], [[0, 0, 0], [1, 0, 0], [1, 0, 0]])
    result = validate_initial_conditions(s)
    assert not result.ok
    assert result.violating_pairs == ((2, 3),)
    # r_12 - r_13 = 0 flags the same pair from the relative coordinates
    d = s.positions[0] - s.positions[1:]
    assert not np.any(d[0] - d[1])
    assert result.relative_violations == ((2, 3),)


@pytest.mark.parametrize(
    "masses, positions, expected",
    [
        ([1, 1], [[1, 0, 0], [-1, 0, 0]], [0, 0, 0]),
        ([1, 4, 4], [[0, 0, 0], [-1, 0, 0], [1, 0, 0]], [0, 0, 0]),
        ([2, 1], [[0, 0, 0], [3, 0, 0]], [1, 0, 0]),
    ],
)
def test_center_of_mass(masses, positions, expected):
    np.testing.assert_allclose(center_of_mass(state(masses, positions)), expected, atol=1e-15)


def test_to_relative_definitions():
    rel = to_relative(state([1, 1], [[1, 0, 0], [-1, 0, 0]]), Mode.RS1)
    assert rel.keys == ((1, 2),)
    np.testing.assert_array_equal(rel[(1, 2)], [2, 0, 0])

    rel = to_relative(state([1, 1, 1], [[0, 0, 0], [1, 0, 0], [0, 1, 0]]), "RS2")
    assert rel.keys == ((1, 2), (1, 3), (2, 3))
    np.testing.assert_array_equal(rel[(1, 2)], [-1, 0, 0])
    np.testing.assert_array_equal(rel[(1, 3)], [0, -1, 0])
    np.testing.assert_array_equal(rel[(2, 3)], [1, -1, 0])


def test_to_relative_rejects_degenerate_pair():
    with pytest.raises(DegeneratePairError) as info:
        to_relative(state([1, 1, 1], [[0, 0, 0], [1, 0, 0], [1, 0, 0]]), Mode.RS2)
    assert info.value.pair == (2, 3)


def test_relative_state_checks_keys():
    with pytest.raises(ValueError):
        RelativeState(Mode.RS1, [1, 1, 1], ((1, 2),), [[1, 0, 0]], [[0, 0, 0]])


def test_rs2_triangle_relation_and_restriction():
    rng = np.random.default_rng(3)
    for n in range(2, 7):
        s = random_state(rng, n)
        rs1 = to_relative(s, Mode.RS1)
        rs2 = to_relative(s, Mode.RS2)
        for (j, k), d in zip(rs2.keys, rs2.positions):
            if j == 1:
                np.testing.assert_array_equal(d, rs1[(1, k)])
            else:
                np.testing.assert_allclose(d, rs1[(1, k)] - rs1[(1, j)], atol=1e-13)
        assert rs2.triangle_residual() < 1e-13
        np.testing.assert_allclose(rs1_to_rs2(rs1).positions, rs2.positions, atol=1e-13)


# grid coordinates keep the subtraction exact, so coincidences survive
grid = st.integers(-4, 4).map(lambda i: i * 0.5)
points = st.lists(st.tuples(grid, grid, grid), min_size=1, max_size=6)


@given(points)
def test_validation_equivalence_absolute_vs_relative(pts):
    s = state(np.ones(len(pts)), np.array(pts, dtype=float))
    result = validate_initial_conditions(s)
    assert set(result.violating_pairs) == set(result.relative_violations)
    if len(pts) >= 2:
        try:
            rel = to_relative(s, Mode.RS1)
        except DegeneratePairError:
            assert not result.ok
        else:
            d = rel.positions
            distinct = all(
                np.any(d[a] - d[b]) for a in range(len(d)) for b in range(a + 1, len(d))
            )
            assert result.ok == distinct


finite = st.floats(-1e3, 1e3, allow_nan=False)


@settings(max_examples=200)
@given(st.integers(0, 2**32 - 1), st.tuples(finite, finite, finite))
def test_center_of_mass_translation_equivariant(seed, shift):
    s = random_state(np.random.default_rng(seed), 4)
    shift = np.array(shift)
    moved = center_of_mass(s.translated(shift))
    expected = center_of_mass(s) + shift
    scale = max(1.0, np.abs(expected).max())
    assert np.abs(moved - expected).max() <= 1e-12 * scale
