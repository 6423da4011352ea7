"""Weighted univariate leaf distributions: fitting and evaluation.

Row weights are treated as frequencies.  Multinomial counts are weighted
sums per class (optionally Laplace-smoothed); Gaussian parameters use the
weighted mean and the weighted Bessel-corrected standard deviation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

# Weights below this are treated as zero and dropped before fitting.
EPSILON_W = 1e-6

# Lower bound on Gaussian scale; also the fallback for degenerate fits
# (single point, or effective sample size of one).
SIGMA_FLOOR = 1e-3

_LOG_SQRT_2PI = 0.5 * math.log(2.0 * math.pi)
_SQRT2 = math.sqrt(2.0)


@dataclass(frozen=True)
class Multinomial:
    probs: tuple

    @property
    def arity(self) -> int:
        return len(self.probs)


@dataclass(frozen=True)
class Gaussian:
    mu: float
    sigma: float


def _clean(values, weights):
    values = np.asarray(values, dtype=float)
    weights = np.asarray(weights, dtype=float)
    if values.shape != weights.shape or values.ndim != 1:
        raise ValueError("values and weights must be 1-d arrays of equal length")
    if values.size == 0:
        raise ValueError("empty column")
    keep = weights >= EPSILON_W
    values, weights = values[keep], weights[keep]
    if values.size == 0:
        raise ValueError("all weights below threshold")
    return values, weights


def fit_multinomial(values, weights, arity: int, alpha: float = 0.0) -> Multinomial:
    """Fit a weighted multinomial with per-class pseudo-count ``alpha``.

    P(class j) = (C_j + alpha) / (sum_l C_l + arity * alpha), where C_j is
    the total weight of rows with value j.
    """
    values, weights = _clean(values, weights)
    if alpha < 0:
        raise ValueError("alpha must be nonnegative")
    iv = values.astype(np.int64)
    if np.any(iv != values) or iv.min() < 0 or iv.max() >= arity:
        raise ValueError("values must be integers in [0, arity)")
    counts = np.bincount(iv, weights=weights, minlength=arity)
    probs = (counts + alpha) / (counts.sum() + arity * alpha)
    return Multinomial(tuple(probs.tolist()))


def fit_gaussian(values, weights, sigma_floor: float = SIGMA_FLOOR) -> Gaussian:
    """Fit a weighted Gaussian with Bessel's correction.

    sigma^2 = S / (S^2 - Q) * sum_i v_i (d_i - mu)^2 with S = sum v_i and
    Q = sum v_i^2.  Degenerate inputs (one point, S^2 == Q, or zero spread)
    fall back to ``sigma_floor``.
    """
    values, weights = _clean(values, weights)
    s = weights.sum()
    mu = float(np.dot(weights, values) / s)
    q = float(np.dot(weights, weights))
    denom = s * s - q
    if values.size < 2 or denom <= 0.0:
        return Gaussian(mu, sigma_floor)
    ssq = float(np.dot(weights, (values - mu) ** 2))
    sigma = math.sqrt(max(s / denom * ssq, 0.0))
    return Gaussian(mu, max(sigma, sigma_floor))


def leaf_log_pdf(dist, x):
    """Log pmf/pdf of a leaf distribution; ``x`` may be a scalar or array."""
    if isinstance(dist, Multinomial):
        xa = np.asarray(x)
        iv = xa.astype(np.int64)
        if np.any(iv != xa) or np.any(iv < 0) or np.any(iv >= dist.arity):
            raise ValueError("categorical value out of range")
        with np.errstate(divide="ignore"):
            logp = np.log(np.asarray(dist.probs))
        out = logp[iv]
        return float(out) if np.isscalar(x) or xa.ndim == 0 else out
    if isinstance(dist, Gaussian):
        z = (np.asarray(x, dtype=float) - dist.mu) / dist.sigma
        out = -0.5 * z * z - math.log(dist.sigma) - _LOG_SQRT_2PI
        return float(out) if np.isscalar(x) or out.ndim == 0 else out
    raise TypeError(f"unknown leaf distribution {type(dist)!r}")


def gaussian_cdf(dist: Gaussian, x):
    """Gaussian CDF via the complementary error function."""
    if np.isscalar(x):
        if x == math.inf:
            return 1.0
        if x == -math.inf:
            return 0.0
        z = (x - dist.mu) / dist.sigma
        return 0.5 * math.erfc(-z / _SQRT2)
    from scipy.special import erfc

    z = (np.asarray(x, dtype=float) - dist.mu) / dist.sigma
    return 0.5 * erfc(-z / _SQRT2)
