"""Finite-sample lower confidence bound for the mixing proportion.

The statistic ``sqrt(n) * d_n(F_n, F)`` computed at the true sampling
distribution is distribution-free for continuous ``F``, so its null
quantiles can be simulated once from uniforms and reused for any
background.  Thresholding the criterion at such a quantile turns the point
estimator into a lower confidence bound: ``P(alpha_0 >= bound) >= 1 -
beta``, with equality exactly when the sample is pure background.  The
same threshold yields a test of homogeneity (signal proportion zero) that
remains consistent against sparse alternatives whose proportion decays
slower than ``n**-0.5``.
"""
from __future__ import annotations

import csv
import math
import os
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .distributions import KnownCdf
from .mixture_core import SortedSample, estimate_alpha_cn, _criterion_from_parts
from .rng import DEFAULT_SEED, stream

__all__ = [
    "CriticalValueSpec",
    "HomogeneityResult",
    "simulate_hn_quantile",
    "asymptotic_cvm_quantile",
    "lower_bound",
    "homogeneity_test",
    "cached_hn_quantile",
    "resolve_cache_path",
]

# Sample size from which the asymptotic quantile is used by default.
ASYMPTOTIC_N = 500

# Namespace tag separating the quantile simulation's streams from other
# subsystems that may share the same base seed.
_NS_HN = 104729

# Upper-tail quantiles of the square root of the limiting Cramer-von Mises
# statistic (integral of a squared Brownian bridge).  Keyed by beta.
_SQRT_CVM_QUANTILES = {
    0.15: math.sqrt(0.28406),
    0.10: math.sqrt(0.34730),
    0.05: math.sqrt(0.46136),
    0.025: math.sqrt(0.58061),
    0.01: math.sqrt(0.74346),
    0.005: math.sqrt(0.86937),
    0.001: math.sqrt(1.16786),
}
_SUPPORTED_LEVELS = (0.10, 0.05, 0.01)


@dataclass(frozen=True)
class CriticalValueSpec:
    """How to obtain the threshold for the lower confidence bound.

    ``method`` is ``"monte_carlo"`` (simulate the finite-n null quantile;
    needs ``n``, ``b`` replications and a ``seed``) or ``"asymptotic_cvm"``
    (use the limiting quantile, adequate from roughly n = 500).
    """

    method: str
    beta: float = 0.05
    n: int = 0
    b: int = 10_000
    seed: int = DEFAULT_SEED

    def __post_init__(self):
        if self.method not in ("monte_carlo", "asymptotic_cvm"):
            raise ValueError("method must be 'monte_carlo' or 'asymptotic_cvm'")
        if not (0.0 < self.beta < 1.0):
            raise ValueError("beta must lie in (0, 1)")
        if self.method == "monte_carlo":
            if self.n < 1:
                raise ValueError("monte_carlo requires the sample size n")
            if self.b < 1000:
                raise ValueError("monte_carlo requires at least 1000 replications")

    def critical_value(self, cache: bool = False) -> float:
        if self.method == "asymptotic_cvm":
            return asymptotic_cvm_quantile(self.beta)
        if cache:
            return cached_hn_quantile(self.n, self.beta, self.b, self.seed)
        return simulate_hn_quantile(self.n, self.beta, self.b, self.seed)


@dataclass(frozen=True)
class HomogeneityResult:
    """Outcome of the no-signal test: reject iff the lower bound is positive."""

    reject: bool
    alpha_lower: float
    critical_value: float
    beta: float


def simulate_hn_quantile(n: int, beta: float, b: int = 10_000, seed: int = DEFAULT_SEED) -> float:
    """Upper ``1 - beta`` quantile of ``sqrt(n) * d_n(F_n, F)`` under the null.

    Simulated with ``b`` uniform samples of size ``n`` (the statistic is
    distribution-free for continuous sampling distributions, so uniforms
    lose nothing).  The quantile is the order statistic of rank
    ``ceil(b * (1 - beta))``.  Deterministic given ``seed``; replications
    use independent per-index streams, so any evaluation order gives the
    same result.
    """
    if n < 1:
        raise ValueError("n must be at least 1")
    if not (0.0 < beta < 1.0):
        raise ValueError("beta must lie in (0, 1)")
    if b < 1000:
        raise ValueError("need at least 1000 replications for a stable quantile")
    grid = np.arange(1, n + 1, dtype=float) / n
    stats = np.empty(b)
    for rep in range(b):
        u = stream(seed, _NS_HN, rep).random(n)
        u.sort()
        diff = grid - u
        stats[rep] = math.sqrt(n * float(np.mean(diff * diff)))
    rank = math.ceil(b * (1.0 - beta))
    return float(np.partition(stats, rank - 1)[rank - 1])


def asymptotic_cvm_quantile(beta: float, interpolate: bool = False) -> float:
    """Upper ``1 - beta`` quantile of the limiting null statistic.

    Supported levels are 0.10, 0.05 and 0.01 (at 0.05 the value is
    0.6792).  With ``interpolate=True``, betas between the tabulated
    levels 0.001..0.15 are linearly interpolated; for anything else use
    the Monte Carlo route instead.
    """
    if not (0.0 < beta < 1.0):
        raise ValueError("beta must lie in (0, 1)")
    for level, value in _SQRT_CVM_QUANTILES.items():
        if math.isclose(beta, level, rel_tol=0.0, abs_tol=1e-12):
            if level in _SUPPORTED_LEVELS or interpolate:
                return value
    if not interpolate:
        raise ValueError(
            "asymptotic quantile tabulated only for beta in {0.10, 0.05, 0.01}; "
            "pass interpolate=True or use a monte_carlo critical value"
        )
    levels = sorted(_SQRT_CVM_QUANTILES)
    if beta < levels[0] or beta > levels[-1]:
        raise ValueError("interpolation covers beta in [0.001, 0.15] only")
    return float(np.interp(beta, levels, [_SQRT_CVM_QUANTILES[l] for l in levels]))


def _default_spec(n: int, beta: float, seed: int = DEFAULT_SEED) -> CriticalValueSpec:
    if n >= ASYMPTOTIC_N:
        return CriticalValueSpec(method="asymptotic_cvm", beta=beta)
    return CriticalValueSpec(method="monte_carlo", beta=beta, n=n, seed=seed)


def lower_bound(
    sample: SortedSample,
    background: KnownCdf,
    beta: float = 0.05,
    spec: CriticalValueSpec | None = None,
) -> float:
    """Lower confidence bound for the identifiable mixing proportion.

    ``P(alpha_0 >= bound) >= 1 - beta`` for every n, with equality when
    the sample is pure background.  The bound is the thresholded estimator
    evaluated at the ``1 - beta`` null quantile; it equals 0 exactly when
    ``sqrt(n) * d_n(F_n, F_b)`` stays within the critical value.  Without
    an explicit ``spec``, samples of size >= 500 use the asymptotic
    quantile and smaller ones a Monte Carlo quantile.
    """
    if not (0.0 < beta < 1.0):
        raise ValueError("beta must lie in (0, 1)")
    if spec is None:
        spec = _default_spec(sample.n, beta)
    elif not math.isclose(spec.beta, beta, rel_tol=0.0, abs_tol=1e-12):
        raise ValueError("beta disagrees with spec.beta")
    return estimate_alpha_cn(sample, background, spec.critical_value())


def homogeneity_test(
    sample: SortedSample,
    background: KnownCdf,
    beta: float = 0.05,
    spec: CriticalValueSpec | None = None,
) -> HomogeneityResult:
    """Test whether the sample is pure background at level ``beta``.

    Rejects exactly when the lower confidence bound is positive, i.e. when
    even a zero signal proportion cannot bring the fit within the null
    quantile.  Consistent against fixed alternatives and against sparse
    ones with proportion ``~ n**-lambda`` for lambda < 1/2.
    """
    if not (0.0 < beta < 1.0):
        raise ValueError("beta must lie in (0, 1)")
    if spec is None:
        spec = _default_spec(sample.n, beta)
    elif not math.isclose(spec.beta, beta, rel_tol=0.0, abs_tol=1e-12):
        raise ValueError("beta disagrees with spec.beta")
    c_n = spec.critical_value()
    fb = np.asarray(background.cdf(sample.values), dtype=float)
    stat = math.sqrt(sample.n) * _criterion_from_parts(sample.ecdf, fb, 0.0)
    if stat <= c_n:
        return HomogeneityResult(reject=False, alpha_lower=0.0, critical_value=c_n, beta=beta)
    bound = estimate_alpha_cn(sample, background, c_n)
    return HomogeneityResult(reject=bound > 0.0, alpha_lower=bound, critical_value=c_n, beta=beta)


# --- disk cache for simulated quantiles ---------------------------------

_CACHE_ENV = "MIXSEP_CACHE_DIR"
_CACHE_FILE = "hn_quantiles.csv"
_CACHE_HEADER = ["n", "beta", "B", "seed", "quantile"]


def resolve_cache_path(cache_dir: str | os.PathLike | None = None) -> Path:
    """Cache file location: explicit dir, else $MIXSEP_CACHE_DIR, else ~/.cache."""
    if cache_dir is None:
        cache_dir = os.environ.get(_CACHE_ENV)
    if cache_dir is None:
        cache_dir = Path.home() / ".cache" / "mixsep"
    return Path(cache_dir) / _CACHE_FILE


def cached_hn_quantile(
    n: int,
    beta: float,
    b: int = 10_000,
    seed: int = DEFAULT_SEED,
    cache_dir: str | os.PathLike | None = None,
) -> float:
    """Like :func:`simulate_hn_quantile` but memoised on disk.

    Rows are keyed by ``(n, beta, B, seed)`` in a small CSV so repeated
    command-line runs with the same configuration skip the simulation.
    """
    path = resolve_cache_path(cache_dir)
    key = (int(n), repr(float(beta)), int(b), int(seed))
    if path.exists():
        with open(path, newline="", encoding="utf-8") as fh:
            reader = csv.reader(fh)
            for row in reader:
                if not row or row[0] == _CACHE_HEADER[0]:
                    continue
                try:
                    row_key = (int(row[0]), repr(float(row[1])), int(row[2]), int(row[3]))
                except (ValueError, IndexError):
                    continue
                if row_key == key:
                    return float(row[4])
    value = simulate_hn_quantile(n, beta, b, seed)
    path.parent.mkdir(parents=True, exist_ok=True)
    fresh = not path.exists()
    with open(path, "a", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        if fresh:
            writer.writerow(_CACHE_HEADER)
        writer.writerow([n, repr(float(beta)), b, seed, repr(value)])
    return value
