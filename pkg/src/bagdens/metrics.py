"""Integrated squared error, Monte Carlo MISE, and band quality metrics.

Metrics accept an optional ``weights`` array on the evaluation grid. With
``weights = f(t)`` the trapezoid integrals become expectations over a fresh
draw from the target, which is what a held-out evaluation sample estimates.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable
import warnings

import numpy as np

from bagdens.errors import InvalidParameterError
from bagdens.rng import RngStream

EVALUATIONS = ("weighted", "uniform")


@dataclass(frozen=True, eq=False)
class EvalGrid:
    points: np.ndarray

    def __post_init__(self):
        t = np.asarray(self.points, dtype=float)
        if t.ndim != 1 or t.size < 2:
            raise InvalidParameterError("evaluation grid needs at least 2 points")
        d = np.diff(t)
        if not np.all(d > 0):
            raise InvalidParameterError("evaluation grid must be strictly increasing")
        if np.ptp(d) > 1e-12 * max(1.0, abs(t).max()):
            raise InvalidParameterError("evaluation grid must be uniformly spaced")
        object.__setattr__(self, "points", t)

    @classmethod
    def for_model(cls, model, points: int = 1001) -> "EvalGrid":
        return cls(model.grid(points))

    @property
    def N(self) -> int:
        return self.points.size

    @property
    def spacing(self) -> float:
        return float(self.points[1] - self.points[0])

    def weights(self, model, evaluation: str = "weighted") -> np.ndarray | None:
        if evaluation == "uniform":
            return None
        if evaluation == "weighted":
            return model.pdf(self.points)
        raise InvalidParameterError(f"unknown evaluation {evaluation!r}; use {EVALUATIONS}")


def _values(estimate, t):
    if callable(estimate):
        return np.asarray(estimate(t), dtype=float)
    v = np.asarray(estimate, dtype=float)
    if v.shape[-1] != t.size:
        raise InvalidParameterError("estimate values do not match the grid")
    return v


def _average(y, t, weights):
    """Trapezoid mean of y over t, optionally weighted; works along the last axis."""
    if weights is None:
        return np.trapezoid(y, t, axis=-1) / (t[-1] - t[0])
    return np.trapezoid(y * weights, t, axis=-1) / np.trapezoid(weights, t)


def ise(estimate, truth, grid: EvalGrid, weights=None):
    """Trapezoid integral of (estimate - truth)^2 over the grid.

    ``estimate`` is a callable or precomputed values (a 2-d array gives one
    ISE per row). With ``weights`` the squared error is integrated against
    the normalised weight, i.e. a mean squared error under that density.
    """
    t = grid.points
    lo, hi = getattr(truth, "support", (t[0], t[-1]))
    if t[0] > lo or t[-1] < hi:
        warnings.warn("evaluation grid does not cover the model support", RuntimeWarning,
                      stacklevel=2)
    f = truth.pdf(t)
    sq = (_values(estimate, t) - f) ** 2
    if weights is None:
        return np.trapezoid(sq, t, axis=-1)
    return np.trapezoid(sq * weights, t, axis=-1) / np.trapezoid(weights, t)


@dataclass(frozen=True)
class MiseResult:
    mean: float
    stderr: float
    values: tuple


def summarize(values) -> MiseResult:
    v = np.asarray(values, dtype=float)
    if v.size == 0:
        raise InvalidParameterError("no replicate values")
    se = float(np.std(v, ddof=1) / np.sqrt(v.size)) if v.size > 1 else 0.0
    return MiseResult(float(v.sum() / v.size), se, tuple(float(a) for a in v))


def mise(model, fit_fn: Callable, n: int, M: int, seed: int, grid: EvalGrid | None = None,
         evaluation: str = "weighted", map_fn=map) -> MiseResult:
    """Monte Carlo MISE: ``fit_fn(sample, rng)`` returns an evaluable estimate.

    Replicate ``m`` samples from stream ``(seed, model.index, n, m, 0)`` and
    hands ``fit_fn`` the stream ``(seed, model.index, n, m, 1)``.
    """
    if M < 1:
        raise InvalidParameterError("need at least one replicate")
    grid = grid or EvalGrid.for_model(model)
    w = grid.weights(model, evaluation)

    def one(m):
        root = RngStream(seed, model.index, n, m)
        x = model.sample(n, root.child(0))
        return float(ise(fit_fn(x, root.child(1)), model, grid, w))

    return summarize(list(map_fn(one, range(M))))


def coverage(band, truth, weights=None) -> float:
    """Fraction of grid points where lower <= f(t) <= upper (inclusive)."""
    f = truth.pdf(band.grid) if hasattr(truth, "pdf") else np.asarray(truth, dtype=float)
    hit = ((band.lower <= f) & (f <= band.upper)).astype(float)
    if weights is None:
        return float(hit.mean())
    return float(_average(hit, band.grid, weights))


def mean_width(band, weights=None) -> float:
    width = band.upper - band.lower
    if weights is None:
        return float(width.mean())
    return float(_average(width, band.grid, weights))
