"""Pointwise variability bands: square-root-scale histogram and KDE bands,
and bootstrap percentile bands from an ensemble's members."""

from __future__ import annotations

from dataclasses import dataclass
import math

import numpy as np
from scipy.special import ndtri

from bagdens.errors import InvalidParameterError
from bagdens.estimators import Histogram, Kde, evaluate_grid


@dataclass(frozen=True, eq=False)
class Band:
    grid: np.ndarray
    lower: np.ndarray
    upper: np.ndarray
    level: float | None = None   # nominal 1 - alpha, when defined

    def __post_init__(self):
        for name in ("grid", "lower", "upper"):
            object.__setattr__(self, name, np.asarray(getattr(self, name), dtype=float))
        if not (self.grid.shape == self.lower.shape == self.upper.shape):
            raise InvalidParameterError("band arrays must share the grid's shape")
        if self.grid.size > 1 and not np.all(np.diff(self.grid) > 0):
            raise InvalidParameterError("band grid must be strictly increasing")
        if np.any(self.lower > self.upper):
            raise InvalidParameterError("band lower bound exceeds upper bound")


def _check_alpha(alpha: float) -> float:
    if not 0.0 < alpha < 1.0:
        raise InvalidParameterError(f"alpha must lie in (0, 1), got {alpha}")
    return float(alpha)


def upper_quantile(q: float) -> float:
    """z such that P(Z > z) = q for a standard normal Z."""
    return float(-ndtri(q))


def sqrt_scale_band(values, half_width: float, grid, level=None) -> Band:
    """(max(sqrt(f) - c, 0))^2 and (sqrt(f) + c)^2 around point values f."""
    root = np.sqrt(np.maximum(np.asarray(values, dtype=float), 0.0))
    lower = np.maximum(root - half_width, 0.0) ** 2
    upper = (root + half_width) ** 2
    return Band(grid, lower, upper, level)


def hist_half_width(m: int, n: int, alpha: float) -> float:
    return upper_quantile(alpha / (2 * m)) / 2.0 * math.sqrt(m / n)


def hist_band(est: Histogram, alpha: float = 0.05, grid=None, m: int | None = None) -> Band:
    """Bonferroni-style square-root band for a histogram with m bins.

    ``m`` defaults to the number of bins spanned by the data.
    """
    alpha = _check_alpha(alpha)
    m = est.counts.size if m is None else int(m)
    if m < 1:
        raise InvalidParameterError("m must be >= 1")
    grid = np.asarray(grid, dtype=float)
    c = hist_half_width(m, est.n, alpha)
    return sqrt_scale_band(est(grid), c, grid, 1.0 - alpha)


def kde_standard_error(est: Kde) -> float:
    """Approximate sd of sqrt(f_hat): ||K||_2 / sqrt(4 n h)."""
    return math.sqrt(est.kernel.l2_norm_sq / (4.0 * est.n * est.h))


def kde_band(est: Kde, multiplier: float = 2.0, grid=None, level=None) -> Band:
    if not multiplier > 0:
        raise InvalidParameterError("multiplier must be > 0")
    grid = np.asarray(grid, dtype=float)
    return sqrt_scale_band(evaluate_grid(est, grid), multiplier * kde_standard_error(est),
                           grid, level)


def order_statistic_quantiles(values, q: float) -> np.ndarray:
    """k-th order statistic along axis 0 with k = ceil(q*B) clamped to [1, B]."""
    v = np.asarray(values, dtype=float)
    B = v.shape[0]
    k = min(max(math.ceil(q * B - 1e-9), 1), B)
    return np.partition(v, k - 1, axis=0)[k - 1]


def bootstrap_band_from_members(member_values, alpha: float, grid) -> Band:
    alpha = _check_alpha(alpha)
    v = np.asarray(member_values, dtype=float)
    if v.shape[0] < 2:
        raise InvalidParameterError("a bootstrap band needs B >= 2 members")
    lower = order_statistic_quantiles(v, alpha / 2.0)
    upper = order_statistic_quantiles(v, 1.0 - alpha / 2.0)
    return Band(grid, lower, upper, 1.0 - alpha)


def bootstrap_band(ens, alpha: float = 0.05, grid=None) -> Band:
    """Percentile band from the members of a bagged ensemble."""
    grid = np.asarray(grid, dtype=float)
    return bootstrap_band_from_members(ens.member_grid_values(grid), alpha, grid)
