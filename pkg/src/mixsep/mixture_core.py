"""Core estimation machinery for the two-component mixture.

The observed distribution is modelled as ``alpha * F_signal + (1 - alpha)
* F_background`` with the background fully known.  For a candidate
proportion ``gamma`` the naive inversion ``(F_n - (1 - gamma) * F_b) /
gamma`` need not be a CDF; projecting it onto the set of CDFs (isotonise,
then clamp to [0, 1]) and measuring how far the projection moved gives a
criterion that is flat for ``gamma`` above the identifiable proportion and
grows steeply below it.  The estimators in this module read the
identifiable proportion off that curve, either by thresholding
(:func:`estimate_alpha_cn`) or by locating the curve's elbow
(:func:`elbow_estimate`).
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .distributions import KnownCdf
from .shape_restricted import clip_unit, isotonic_regression

__all__ = [
    "SortedSample",
    "StepCdf",
    "CriterionCurve",
    "NoElbowError",
    "naive_component_values",
    "isotonized_cdf",
    "criterion",
    "criterion_curve",
    "default_cn",
    "estimate_alpha_cn",
    "elbow_estimate",
    "elbow_peaks",
]

# Bisection stopping width for the thresholded estimator.
_BISECT_TOL = 1e-6
_BISECT_MAX_ITER = 60

# Second-difference level below which a criterion curve counts as flat
# (no detectable elbow), and the relative window for near-equal peaks.
_FLAT_TOL = 1e-12
_PEAK_WINDOW = 0.05


class NoElbowError(ValueError):
    """Raised when a criterion curve is too flat to contain an elbow."""


@dataclass(frozen=True, eq=False)
class SortedSample:
    """A sample sorted ascending with its empirical CDF at each point.

    ``ecdf[i]`` is the fraction of sample values ``<= values[i]``, so tied
    values share the value at the upper end of their block (the
    right-continuous convention).
    """

    values: np.ndarray
    ecdf: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        ecdf = np.asarray(self.ecdf, dtype=float)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "ecdf", ecdf)
        if values.ndim != 1 or values.shape != ecdf.shape:
            raise ValueError("values and ecdf must be one-dimensional and equal length")
        if values.size == 0:
            raise ValueError("empty sample")
        if not np.all(np.isfinite(values)):
            raise ValueError("sample values must be finite")
        if np.any(np.diff(values) < 0.0):
            raise ValueError("values must be sorted ascending")
        if np.any(ecdf <= 0.0) or np.any(ecdf > 1.0) or np.any(np.diff(ecdf) < 0.0):
            raise ValueError("ecdf values must be non-decreasing and lie in (0, 1]")

    @classmethod
    def from_data(cls, data) -> "SortedSample":
        """Sort raw observations and attach empirical CDF values."""
        x = np.asarray(data, dtype=float).ravel()
        if x.size == 0:
            raise ValueError("empty sample")
        if not np.all(np.isfinite(x)):
            raise ValueError("sample values must be finite")
        x = np.sort(x)
        ecdf = np.searchsorted(x, x, side="right") / x.size
        return cls(values=x, ecdf=ecdf)

    @property
    def n(self) -> int:
        return self.values.size


@dataclass(frozen=True, eq=False)
class StepCdf:
    """Right-continuous step function: 0 left of the first jump.

    ``values[i]`` is the function value on ``[jumps[i], jumps[i+1])``.
    """

    jumps: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        jumps = np.asarray(self.jumps, dtype=float)
        values = np.asarray(self.values, dtype=float)
        object.__setattr__(self, "jumps", jumps)
        object.__setattr__(self, "values", values)
        if jumps.ndim != 1 or jumps.shape != values.shape or jumps.size == 0:
            raise ValueError("jumps and values must be one-dimensional, equal length, non-empty")
        if np.any(np.diff(jumps) <= 0.0):
            raise ValueError("jump locations must be strictly increasing")
        if np.any(np.diff(values) < -1e-12):
            raise ValueError("step values must be non-decreasing")
        if values[0] < -1e-12 or values[-1] > 1.0 + 1e-12:
            raise ValueError("step values must lie in [0, 1]")

    def evaluate(self, x):
        """Evaluate at ``x`` (scalar or array), right-continuously."""
        xq = np.asarray(x, dtype=float)
        scalar = xq.ndim == 0
        xq = np.atleast_1d(xq)
        idx = np.searchsorted(self.jumps, xq, side="right")
        out = np.where(idx > 0, self.values[np.maximum(idx - 1, 0)], 0.0)
        return float(out[0]) if scalar else out


@dataclass(frozen=True, eq=False)
class CriterionCurve:
    """Criterion values on a uniform grid over (0, 1].

    ``second_differences`` holds the central second differences
    ``(v[k-1] - 2 v[k] + v[k+1]) / h**2`` for interior grid points, so it
    is two entries shorter than ``gammas``.
    """

    gammas: np.ndarray
    values: np.ndarray
    second_differences: np.ndarray

    def __post_init__(self):
        gammas = np.asarray(self.gammas, dtype=float)
        values = np.asarray(self.values, dtype=float)
        second = np.asarray(self.second_differences, dtype=float)
        object.__setattr__(self, "gammas", gammas)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "second_differences", second)
        if gammas.ndim != 1 or gammas.shape != values.shape:
            raise ValueError("gammas and values must be one-dimensional and equal length")
        if gammas.size < 3:
            raise ValueError("a criterion curve needs at least 3 grid points")
        if second.shape != (gammas.size - 2,):
            raise ValueError("second_differences must cover exactly the interior grid points")
        if np.any(values < -1e-12):
            raise ValueError("criterion values must be non-negative")


def naive_component_values(sample: SortedSample, background: KnownCdf, gamma: float) -> np.ndarray:
    """Naive signal-CDF values at the order statistics for a candidate gamma.

    Computes ``(F_n(x_i) - (1 - gamma) * F_b(x_i)) / gamma`` at each sample
    point.  The result need not be monotone nor inside [0, 1]; it is the
    raw material the isotonic projection works on.
    """
    if not (0.0 < gamma <= 1.0):
        raise ValueError("gamma must lie in (0, 1]")
    fb = np.asarray(background.cdf(sample.values), dtype=float)
    return (sample.ecdf - (1.0 - gamma) * fb) / gamma


def _naive_from_parts(ecdf: np.ndarray, fb: np.ndarray, gamma: float) -> np.ndarray:
    return (ecdf - (1.0 - gamma) * fb) / gamma


def _criterion_from_parts(ecdf: np.ndarray, fb: np.ndarray, gamma: float) -> float:
    """Criterion value using precomputed background CDF values."""
    if gamma == 0.0:
        diff = ecdf - fb
        return math.sqrt(float(np.mean(diff * diff)))
    naive = _naive_from_parts(ecdf, fb, gamma)
    fitted = clip_unit(isotonic_regression(naive))
    diff = fitted - naive
    return gamma * math.sqrt(float(np.mean(diff * diff)))


def isotonized_cdf(sample: SortedSample, background: KnownCdf, gamma: float) -> StepCdf:
    """Project the naive signal-CDF values onto valid CDFs.

    Isotonic regression followed by clamping to [0, 1]; the result, read as
    a right-continuous step function with jumps at the distinct sample
    values, is the closest CDF to the naive inversion in the empirical L2
    sense.
    """
    naive = naive_component_values(sample, background, gamma)
    fitted = clip_unit(isotonic_regression(naive))
    jumps = np.unique(sample.values)
    idx_last = np.searchsorted(sample.values, jumps, side="right") - 1
    return StepCdf(jumps=jumps, values=fitted[idx_last])


def criterion(sample: SortedSample, background: KnownCdf, gamma: float) -> float:
    """Scaled distance between the naive and projected signal CDFs.

    Returns ``gamma * d_n(naive, projected)`` where ``d_n`` is the L2
    distance over the sample points (duplicates counted separately).  By
    construction this equals the distance from the empirical CDF to the
    best fitting mixture with proportion ``gamma``; the convention at
    ``gamma == 0`` is the distance between the empirical CDF and the
    background.  Non-increasing and convex in ``gamma``.
    """
    if not (0.0 <= gamma <= 1.0):
        raise ValueError("gamma must lie in [0, 1]")
    fb = np.asarray(background.cdf(sample.values), dtype=float)
    return _criterion_from_parts(sample.ecdf, fb, gamma)


def criterion_curve(sample: SortedSample, background: KnownCdf, grid_size: int = 200) -> CriterionCurve:
    """Criterion evaluated on the uniform grid ``k / grid_size``, k = 1..grid_size."""
    if grid_size < 10:
        raise ValueError("grid_size must be at least 10")
    fb = np.asarray(background.cdf(sample.values), dtype=float)
    gammas = np.arange(1, grid_size + 1, dtype=float) / grid_size
    values = np.empty(grid_size)
    for k, g in enumerate(gammas.tolist()):
        values[k] = _criterion_from_parts(sample.ecdf, fb, g)
    h = 1.0 / grid_size
    second = (values[:-2] - 2.0 * values[1:-1] + values[2:]) / (h * h)
    return CriterionCurve(gammas=gammas, values=values, second_differences=second)


def default_cn(n: int, tau: float = 0.1) -> float:
    """Default threshold ``tau * log(log(n))`` for the thresholded estimator.

    ``tau`` in [0.05, 0.1] works well across the simulation scenarios; 0.1
    is the default everywhere in this package.
    """
    if tau <= 0.0 or not math.isfinite(tau):
        raise ValueError("tau must be positive")
    if n <= math.e:
        raise ValueError("cn undefined: n must exceed e (need n >= 3)")
    return tau * math.log(math.log(n))


def estimate_alpha_cn(sample: SortedSample, background: KnownCdf, c_n: float) -> float:
    """Thresholded estimate of the identifiable mixing proportion.

    The feasible set ``{gamma : sqrt(n) * criterion(gamma) <= c_n}`` is an
    interval stretching to 1, so its left endpoint is located by bisection
    (absolute tolerance 1e-6).  Returns 0 when the background alone already
    fits within the threshold.
    """
    if c_n <= 0.0 or not math.isfinite(c_n):
        raise ValueError("c_n must be positive")
    fb = np.asarray(background.cdf(sample.values), dtype=float)
    root_n = math.sqrt(sample.n)
    threshold = c_n / root_n
    if _criterion_from_parts(sample.ecdf, fb, 0.0) <= threshold:
        return 0.0
    lo, hi = 0.0, 1.0  # criterion(1) == 0 < threshold, so hi stays feasible
    for _ in range(_BISECT_MAX_ITER):
        if hi - lo <= _BISECT_TOL:
            break
        mid = 0.5 * (lo + hi)
        if _criterion_from_parts(sample.ecdf, fb, mid) <= threshold:
            hi = mid
        else:
            lo = mid
    return hi


def _interior_peaks(second: np.ndarray) -> np.ndarray:
    """Indices of local maxima of the second-difference sequence."""
    n = second.size
    idx = []
    for i in range(n):
        left_ok = i == 0 or second[i] >= second[i - 1]
        right_ok = i == n - 1 or second[i] >= second[i + 1]
        if left_ok and right_ok:
            idx.append(i)
    return np.asarray(idx, dtype=int)


def elbow_peaks(curve: CriterionCurve) -> np.ndarray:
    """Gamma locations of second-difference peaks within 5% of the maximum.

    Useful as a diagnostic: more than one entry signals an ambiguous
    elbow, and the smallest entry is what :func:`elbow_estimate` returns.
    """
    second = curve.second_differences
    top = float(second.max())
    if top <= _FLAT_TOL:
        raise NoElbowError("no elbow detected: criterion curve is flat")
    peaks = _interior_peaks(second)
    near = peaks[second[peaks] >= (1.0 - _PEAK_WINDOW) * top]
    return curve.gammas[1:-1][near]


def elbow_estimate(curve: CriterionCurve) -> float:
    """Elbow of the criterion curve: where its curvature peaks.

    Returns the gamma with the largest central second difference; if
    several peaks come within 5% of the maximum, the smallest gamma among
    them is returned (ties always resolve toward the smaller gamma).
    Raises :class:`NoElbowError` when the curve is flat to within 1e-12.
    """
    return float(elbow_peaks(curve)[0])
