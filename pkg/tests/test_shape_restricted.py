"""Isotonic projection and least concave majorant against brute-force oracles."""
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mixsep.shape_restricted import (
    PiecewiseLinearConcaveFn,
    clip_unit,
    isotonic_regression,
    least_concave_majorant,
)


def isotonic_oracle(y, w=None):
    """Quadratic-time max-min formula for the weighted isotonic fit.

    iso[i] = max over s <= i of (min over t >= i of weighted mean y[s..t]).
    Slow but obviously correct, which is the point.
    """
    y = np.asarray(y, dtype=float)
    n = y.size
    w = np.ones(n) if w is None else np.asarray(w, dtype=float)
    cw = np.concatenate([[0.0], np.cumsum(w)])
    cyw = np.concatenate([[0.0], np.cumsum(y * w)])

    def block_mean(s, t):
        return (cyw[t + 1] - cyw[s]) / (cw[t + 1] - cw[s])

    out = np.empty(n)
    for i in range(n):
        out[i] = max(min(block_mean(s, t) for t in range(i, n)) for s in range(i + 1))
    return out


def lcm_oracle(x, y):
    """Least concave majorant at the knots via exhaustive chords."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    n = x.size
    out = np.empty(n)
    for i in range(n):
        best = y[i]
        for j in range(i + 1):
            for k in range(i, n):
                if j == k:
                    continue
                chord = (y[j] * (x[k] - x[i]) + y[k] * (x[i] - x[j])) / (x[k] - x[j])
                best = max(best, chord)
        out[i] = best
    return out


# --- isotonic regression ---------------------------------------------------


def test_pava_pools_single_violation():
    got = isotonic_regression([0.5, 0.2, 0.8])
    np.testing.assert_allclose(got, [0.35, 0.35, 0.8], atol=1e-15)


def test_pava_all_decreasing_collapses_to_mean():
    np.testing.assert_allclose(isotonic_regression([3.0, 2.0, 1.0]), [2.0, 2.0, 2.0])


def test_pava_monotone_input_unchanged():
    y = [0.1, 0.4, 0.9]
    np.testing.assert_array_equal(isotonic_regression(y), y)


def test_pava_weights_shift_pooled_mean():
    # pooled mean of (1 w=1, 0 w=3) is 0.25
    got = isotonic_regression([1.0, 0.0], weights=[1.0, 3.0])
    np.testing.assert_allclose(got, [0.25, 0.25])


def test_pava_rejects_bad_input():
    with pytest.raises(ValueError, match="empty sample"):
        isotonic_regression([])
    with pytest.raises(ValueError):
        isotonic_regression([1.0, np.nan])
    with pytest.raises(ValueError):
        isotonic_regression([1.0, 2.0], weights=[1.0, 0.0])
    with pytest.raises(ValueError):
        isotonic_regression([1.0, 2.0], weights=[1.0])


finite_vals = st.floats(min_value=-10.0, max_value=10.0,
                        allow_nan=False, allow_infinity=False)
pos_weights = st.floats(min_value=0.1, max_value=10.0,
                        allow_nan=False, allow_infinity=False)


@settings(max_examples=200, deadline=None)
@given(st.lists(finite_vals, min_size=1, max_size=50))
def test_pava_matches_oracle(ys):
    got = isotonic_regression(ys)
    want = isotonic_oracle(ys)
    np.testing.assert_allclose(got, want, atol=1e-12)


@settings(max_examples=100, deadline=None)
@given(st.lists(st.tuples(finite_vals, pos_weights), min_size=1, max_size=40))
def test_weighted_pava_matches_oracle(pairs):
    ys = [p[0] for p in pairs]
    ws = [p[1] for p in pairs]
    got = isotonic_regression(ys, weights=ws)
    want = isotonic_oracle(ys, ws)
    np.testing.assert_allclose(got, want, atol=1e-12)


@settings(max_examples=150, deadline=None)
@given(st.lists(finite_vals, min_size=1, max_size=60))
def test_pava_output_is_monotone_and_idempotent(ys):
    fit = isotonic_regression(ys)
    assert np.all(np.diff(fit) >= -1e-12)
    np.testing.assert_allclose(isotonic_regression(fit), fit, atol=1e-12)


@settings(max_examples=100, deadline=None)
@given(st.lists(st.tuples(finite_vals, pos_weights), min_size=1, max_size=40))
def test_pava_preserves_weighted_mass(pairs):
    ys = np.asarray([p[0] for p in pairs])
    ws = np.asarray([p[1] for p in pairs])
    fit = isotonic_regression(ys, weights=ws)
    assert np.dot(ws, fit) == pytest.approx(np.dot(ws, ys), abs=1e-9 * (1 + abs(np.dot(ws, ys))))


@settings(max_examples=100, deadline=None)
@given(st.lists(st.floats(min_value=-3, max_value=4, allow_nan=False), min_size=1, max_size=30))
def test_clip_unit_bounds(ys):
    clipped = clip_unit(np.asarray(ys))
    assert np.all(clipped >= 0.0) and np.all(clipped <= 1.0)
    inside = (np.asarray(ys) >= 0) & (np.asarray(ys) <= 1)
    np.testing.assert_array_equal(clipped[inside], np.asarray(ys)[inside])


# --- least concave majorant -------------------------------------------------


def test_lcm_of_convex_points_is_straight_line():
    # the sagging middle knot is absorbed into one chord
    hull = least_concave_majorant([0.0, 0.5, 1.0], [0.0, 0.2, 1.0])
    np.testing.assert_allclose(hull.evaluate([0.0, 0.5, 1.0]), [0.0, 0.5, 1.0], atol=1e-15)
    assert hull.knots.size == 2


def test_lcm_keeps_concave_points():
    hull = least_concave_majorant([0.0, 0.5, 1.0], [0.0, 0.8, 1.0])
    np.testing.assert_allclose(hull.evaluate([0.0, 0.5, 1.0]), [0.0, 0.8, 1.0], atol=1e-15)
    assert hull.knots.size == 3


def test_lcm_rejects_tied_knots():
    with pytest.raises(ValueError):
        least_concave_majorant([0.0, 0.0, 1.0], [0.0, 0.1, 1.0])


@st.composite
def knot_sets(draw, max_size=25):
    # gaps bounded away from zero keep every chord slope representable
    n = draw(st.integers(min_value=2, max_value=max_size))
    gaps = draw(st.lists(st.floats(min_value=1e-6, max_value=10.0, allow_nan=False),
                         min_size=n, max_size=n))
    ys = draw(st.lists(st.floats(min_value=-5.0, max_value=5.0, allow_nan=False),
                       min_size=n, max_size=n))
    return np.cumsum(np.asarray(gaps)), np.asarray(ys)


@settings(max_examples=150, deadline=None)
@given(knot_sets())
def test_lcm_matches_chord_oracle(knots_values):
    xs, ys = knots_values
    hull = least_concave_majorant(xs, ys)
    want = lcm_oracle(xs, ys)
    got = hull.evaluate(xs)
    np.testing.assert_allclose(got, want, atol=1e-12 * (1 + np.abs(want).max()))


@settings(max_examples=150, deadline=None)
@given(knot_sets())
def test_lcm_dominates_and_is_concave(knots_values):
    xs, ys = knots_values
    hull = least_concave_majorant(xs, ys)
    assert np.all(hull.evaluate(xs) >= ys - 1e-12)
    slopes = hull.slopes()
    assert np.all(np.diff(slopes) <= 1e-9)


@settings(max_examples=100, deadline=None)
@given(knot_sets(max_size=15))
def test_lcm_left_derivative_is_nonincreasing(knots_values):
    xs, ys = knots_values
    hull = least_concave_majorant(xs, ys)
    span = xs[-1] - xs[0]
    if span <= 0:
        return
    qs = xs[0] + np.linspace(0.05, 1.0, 13) * span
    d = hull.left_derivative(qs)
    assert np.all(np.diff(d) <= 1e-9)


# --- piecewise linear concave function ---------------------------------------


def test_concave_fn_interpolates_and_extends_right():
    f = PiecewiseLinearConcaveFn(knots=np.array([0.0, 1.0, 2.0]),
                                 values=np.array([0.0, 1.0, 1.5]))
    assert f.evaluate(0.5) == pytest.approx(0.5)
    assert f.evaluate(1.5) == pytest.approx(1.25)
    # beyond the last knot the function stays at its final value
    assert f.evaluate(5.0) == pytest.approx(1.5)


def test_concave_fn_rejects_queries_below_domain():
    f = PiecewiseLinearConcaveFn(knots=np.array([0.0, 1.0]), values=np.array([0.0, 1.0]))
    with pytest.raises(ValueError):
        f.evaluate(-0.1)


def test_concave_fn_rejects_convex_values():
    with pytest.raises(ValueError):
        PiecewiseLinearConcaveFn(knots=np.array([0.0, 1.0, 2.0]),
                                 values=np.array([0.0, 0.1, 1.0]))


def test_left_derivative_matches_segment_slopes():
    f = PiecewiseLinearConcaveFn(knots=np.array([0.0, 1.0, 3.0]),
                                 values=np.array([0.0, 2.0, 3.0]))
    assert f.left_derivative(0.5) == pytest.approx(2.0)
    assert f.left_derivative(1.0) == pytest.approx(2.0)  # left limit at the knot
    assert f.left_derivative(2.0) == pytest.approx(0.5)
    assert f.left_derivative(3.0) == pytest.approx(0.5)
