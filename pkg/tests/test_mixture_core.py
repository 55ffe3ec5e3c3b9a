"""Criterion, thresholded estimator and elbow: pinned values and structural laws."""
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mixsep.distributions import Beta, Normal, Uniform
from mixsep.mixture_core import (
    CriterionCurve,
    NoElbowError,
    SortedSample,
    criterion,
    criterion_curve,
    default_cn,
    elbow_estimate,
    elbow_peaks,
    estimate_alpha_cn,
    isotonized_cdf,
    naive_component_values,
)
from mixsep.rng import stream

UNIF = Uniform(0.0, 1.0)


def beta_uniform_sample(n, alpha, seed):
    """Draws from alpha * Beta(1, 10) + (1 - alpha) * Uniform(0, 1)."""
    rng = stream(seed, 2024)
    mask = rng.random(n) < alpha
    x = np.where(mask, Beta(1, 10).sample(n, rng), rng.random(n))
    return SortedSample.from_data(x)


def mixture_cdf(x, alpha):
    return alpha * Beta(1, 10).cdf(x) + (1 - alpha) * UNIF.cdf(x)


# --- sorted sample ------------------------------------------------------------


def test_ecdf_ties_share_the_upper_value():
    s = SortedSample.from_data([1.0, 2.0, 1.0])
    np.testing.assert_allclose(s.values, [1.0, 1.0, 2.0])
    np.testing.assert_allclose(s.ecdf, [2 / 3, 2 / 3, 1.0])


def test_from_data_sorts_and_rejects_bad_input():
    s = SortedSample.from_data([0.9, 0.1, 0.5])
    np.testing.assert_allclose(s.values, [0.1, 0.5, 0.9])
    with pytest.raises(ValueError, match="empty sample"):
        SortedSample.from_data([])
    with pytest.raises(ValueError):
        SortedSample.from_data([0.1, np.inf])


# --- naive inversion ----------------------------------------------------------


def test_naive_values_single_point():
    s = SortedSample.from_data([0.5])
    got = naive_component_values(s, UNIF, 0.5)
    # (1 - 0.5 * 0.5) / 0.5
    np.testing.assert_allclose(got, [1.5])


def test_naive_values_at_gamma_one_equal_ecdf():
    s = beta_uniform_sample(200, 0.1, seed=3)
    np.testing.assert_array_equal(naive_component_values(s, UNIF, 1.0), s.ecdf)


def test_naive_values_reject_gamma_zero():
    s = SortedSample.from_data([0.5])
    with pytest.raises(ValueError):
        naive_component_values(s, UNIF, 0.0)


# --- criterion ------------------------------------------------------------------


def test_criterion_vanishes_at_gamma_one():
    s = beta_uniform_sample(500, 0.2, seed=5)
    assert criterion(s, UNIF, 1.0) == 0.0


def test_criterion_at_zero_is_distance_to_background():
    s = beta_uniform_sample(300, 0.15, seed=11)
    want = math.sqrt(np.mean((s.ecdf - UNIF.cdf(s.values)) ** 2))
    assert criterion(s, UNIF, 0.0) == pytest.approx(want, abs=1e-15)


def test_criterion_rejects_out_of_range_gamma():
    s = SortedSample.from_data([0.5])
    for g in (-0.1, 1.1):
        with pytest.raises(ValueError):
            criterion(s, UNIF, g)


@settings(max_examples=60, deadline=None)
@given(st.integers(min_value=1, max_value=200), st.integers(min_value=0, max_value=10 ** 6),
       st.floats(min_value=0.01, max_value=1.0))
def test_criterion_equals_projection_distance(n, seed, gamma):
    """The criterion must equal gamma times the L2 gap between the projected
    CDF (read back off the public step function) and the naive values."""
    s = SortedSample.from_data(stream(seed, 77).random(n))
    naive = naive_component_values(s, UNIF, gamma)
    step = isotonized_cdf(s, UNIF, gamma)
    gap = step.evaluate(s.values) - naive
    want = gamma * math.sqrt(np.mean(gap ** 2))
    assert criterion(s, UNIF, gamma) == pytest.approx(want, abs=1e-12)


@pytest.mark.parametrize("seed", [0, 1, 2])
def test_criterion_bounded_by_distance_to_true_mixture(seed):
    """For any gamma >= alpha the scaled projection distance cannot exceed
    the empirical distance to the data-generating mixture CDF."""
    alpha = 0.3
    s = beta_uniform_sample(800, alpha, seed=seed)
    d_truth = math.sqrt(np.mean((s.ecdf - mixture_cdf(s.values, alpha)) ** 2))
    for gamma in (alpha, 0.5, 0.8, 1.0):
        assert criterion(s, UNIF, gamma) <= d_truth + 1e-12


def test_criterion_curve_monotone_convex():
    s = beta_uniform_sample(600, 0.1, seed=21)
    curve = criterion_curve(s, UNIF, 100)
    assert np.all(np.diff(curve.values) <= 1e-10)
    assert np.all(curve.second_differences >= -1e-10)


def test_criterion_curve_rejects_small_grid():
    s = SortedSample.from_data([0.5, 0.6, 0.7])
    with pytest.raises(ValueError):
        criterion_curve(s, UNIF, 5)


def test_isotonized_cdf_collapses_ties():
    s = SortedSample.from_data([0.2, 0.2, 0.7])
    step = isotonized_cdf(s, UNIF, 0.9)
    assert step.jumps.size == 2
    assert step.evaluate(0.1) == 0.0


# --- transform invariance --------------------------------------------------------


def test_probit_transform_leaves_estimates_unchanged():
    """Pushing data and background through the same strictly increasing map
    must not move the criterion or the thresholded estimate."""
    s_unif = beta_uniform_sample(400, 0.12, seed=31)
    z = Normal(0.0, 1.0).quantile(s_unif.values)
    s_norm = SortedSample.from_data(z)
    norm = Normal(0.0, 1.0)
    for gamma in (0.05, 0.12, 0.5, 0.9):
        assert criterion(s_norm, norm, gamma) == pytest.approx(
            criterion(s_unif, UNIF, gamma), abs=1e-12)
    c_n = default_cn(s_unif.n)
    assert estimate_alpha_cn(s_norm, norm, c_n) == estimate_alpha_cn(s_unif, UNIF, c_n)


# --- thresholded estimator ---------------------------------------------------------


def test_default_cn_pinned_values():
    assert default_cn(5000, 0.1) == pytest.approx(0.21420868489375267, abs=1e-15)
    assert default_cn(3, 0.1) == pytest.approx(0.00940478276166991, abs=1e-15)


def test_default_cn_rejects_bad_arguments():
    with pytest.raises(ValueError, match="tau"):
        default_cn(100, 0.0)
    with pytest.raises(ValueError, match="n must exceed e"):
        default_cn(2)


def test_estimate_alpha_rejects_nonpositive_threshold():
    s = SortedSample.from_data([0.5])
    with pytest.raises(ValueError):
        estimate_alpha_cn(s, UNIF, 0.0)


def test_estimate_alpha_zero_when_background_fits():
    # generous threshold: the empirical CDF of uniforms is within c_n/sqrt(n)
    s = SortedSample.from_data(stream(9, 50).random(100))
    assert estimate_alpha_cn(s, UNIF, 50.0) == 0.0


def test_bisection_agrees_with_grid_scan():
    s = beta_uniform_sample(1000, 0.2, seed=41)
    c_n = default_cn(s.n)
    got = estimate_alpha_cn(s, UNIF, c_n)
    threshold = c_n / math.sqrt(s.n)
    gammas = np.arange(1, 10001) / 10000
    feasible = [g for g in gammas if criterion(s, UNIF, float(g)) <= threshold]
    want = feasible[0]
    assert got == pytest.approx(want, abs=2e-4)


def test_estimate_alpha_close_to_truth_in_mixture():
    s = beta_uniform_sample(5000, 0.1, seed=51)
    got = estimate_alpha_cn(s, UNIF, default_cn(s.n))
    assert got == pytest.approx(0.1, abs=0.05)


# --- elbow -----------------------------------------------------------------------


def piecewise_linear_curve(kink, grid=10):
    """Criterion-like curve dropping linearly to zero at ``kink``."""
    gammas = np.arange(1, grid + 1) / grid
    values = np.maximum(kink - gammas, 0.0)
    h = 1.0 / grid
    second = (values[:-2] - 2 * values[1:-1] + values[2:]) / h ** 2
    return CriterionCurve(gammas=gammas, values=values, second_differences=second)


def test_elbow_finds_the_kink():
    curve = piecewise_linear_curve(kink=0.3)
    assert elbow_estimate(curve) == pytest.approx(0.3)
    peaks = elbow_peaks(curve)
    assert peaks[0] == pytest.approx(0.3)


def test_elbow_flat_curve_raises():
    gammas = np.arange(1, 11) / 10
    values = np.zeros(10)
    curve = CriterionCurve(gammas=gammas, values=values,
                           second_differences=np.zeros(8))
    with pytest.raises(NoElbowError, match="flat"):
        elbow_estimate(curve)


def test_elbow_near_equal_peaks_resolve_to_smaller_gamma():
    gammas = np.arange(1, 11) / 10
    second = np.zeros(8)
    second[2] = 0.97   # gamma 0.4
    second[5] = 1.0    # gamma 0.7, within 5% of each other
    curve = CriterionCurve(gammas=gammas, values=np.linspace(1, 0, 10),
                           second_differences=second)
    assert elbow_estimate(curve) == pytest.approx(0.4)
    assert elbow_peaks(curve).size == 2


def test_elbow_recovers_proportion_on_average():
    vals = []
    for seed in range(10):
        s = beta_uniform_sample(3000, 0.1, seed=100 + seed)
        vals.append(elbow_estimate(criterion_curve(s, UNIF, 200)))
    assert 0.06 <= np.mean(vals) <= 0.14
