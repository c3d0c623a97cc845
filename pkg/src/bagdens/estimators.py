"""Histogram, frequency polygon and kernel density estimators.

All fitted estimators are immutable and callable on scalars or arrays::

    >>> est = fit_histogram([0.25, 0.75], BinGrid(0.0, 1.0))
    >>> est(0.5)
    1.0
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
import math

import numpy as np
from scipy.signal import fftconvolve

from bagdens.errors import InvalidParameterError, RejectedInputError

SQRT_2PI = math.sqrt(2.0 * math.pi)


def as_sample(values, min_size: int = 1) -> np.ndarray:
    """Validate observations and return them as a 1-d float array."""
    x = np.asarray(values, dtype=float).ravel()
    if x.size < min_size:
        raise RejectedInputError(f"need at least {min_size} observations, got {x.size}")
    if not np.all(np.isfinite(x)):
        raise RejectedInputError("sample contains non-finite values")
    return x


def _check_bandwidth(h) -> float:
    h = float(h)
    if not math.isfinite(h) or h <= 0:
        raise InvalidParameterError(f"bandwidth must be finite and > 0, got {h}")
    return h


def _scalar_or_array(x, out):
    return float(np.reshape(out, -1)[0]) if np.ndim(x) == 0 else out


# -- kernels ------------------------------------------------------------------

def _gaussian(u):
    return np.exp(-0.5 * u * u) / SQRT_2PI


def _epanechnikov(u):
    return np.where(np.abs(u) <= 1.0, 0.75 * (1.0 - u * u), 0.0)


def _rectangular(u):
    return np.where(np.abs(u) <= 1.0, 0.5, 0.0)


def _triangular(u):
    return np.maximum(1.0 - np.abs(u), 0.0)


@dataclass(frozen=True)
class Kernel:
    """A symmetric second-order kernel with its analytic constants.

    ``l2_norm_sq`` is the integral of K^2 and ``mu2`` the second moment.
    ``radius`` is the half-width of the support (infinite for gaussian).
    """

    kind: str
    l2_norm_sq: float
    mu2: float
    radius: float
    _func: object = field(repr=False, compare=False, default=None)

    def __call__(self, u):
        u = np.asarray(u, dtype=float)
        return _scalar_or_array(u, self._func(u))


KERNELS = {
    "gaussian": Kernel("gaussian", 1.0 / (2.0 * math.sqrt(math.pi)), 1.0, math.inf, _gaussian),
    "epanechnikov": Kernel("epanechnikov", 0.6, 0.2, 1.0, _epanechnikov),
    "rectangular": Kernel("rectangular", 0.5, 1.0 / 3.0, 1.0, _rectangular),
    "triangular": Kernel("triangular", 2.0 / 3.0, 1.0 / 6.0, 1.0, _triangular),
}


def get_kernel(kernel="gaussian") -> Kernel:
    if isinstance(kernel, Kernel):
        return kernel
    try:
        return KERNELS[str(kernel).lower()]
    except KeyError:
        raise InvalidParameterError(
            f"unknown kernel {kernel!r}; choose from {sorted(KERNELS)}"
        ) from None


def kernel_constants(kernel="gaussian") -> tuple[float, float]:
    """Return ``(||K||_2^2, mu_2(K))`` for a kernel."""
    k = get_kernel(kernel)
    return k.l2_norm_sq, k.mu2


# -- histogram ----------------------------------------------------------------

@dataclass(frozen=True)
class BinGrid:
    """Bins ``[origin + j*width, origin + (j+1)*width)`` for every integer j."""

    origin: float
    width: float

    def __post_init__(self):
        if not math.isfinite(self.origin):
            raise InvalidParameterError("grid origin must be finite")
        if not (math.isfinite(self.width) and self.width > 0):
            raise InvalidParameterError(f"bin width must be > 0, got {self.width}")

    def index(self, x) -> np.ndarray:
        return np.floor((np.asarray(x, dtype=float) - self.origin) / self.width).astype(np.int64)

    def midpoint(self, j):
        return self.origin + (np.asarray(j) + 0.5) * self.width


@dataclass(frozen=True, eq=False)
class Histogram:
    grid: BinGrid
    first: int            # index of counts[0]
    counts: np.ndarray    # dense counts for bins first .. first+len-1
    n: int

    @property
    def h(self) -> float:
        return self.grid.width

    @property
    def bins(self) -> np.ndarray:
        return np.arange(self.first, self.first + self.counts.size)

    def count_map(self) -> dict[int, int]:
        return {int(j): int(c) for j, c in zip(self.bins, self.counts) if c}

    @cached_property
    def heights(self) -> np.ndarray:
        return self.counts / (self.n * self.grid.width)

    def evaluate(self, x):
        xa = np.asarray(x, dtype=float)
        if not np.all(np.isfinite(xa)):
            raise RejectedInputError("evaluation points must be finite")
        k = self.grid.index(xa) - self.first
        inside = (k >= 0) & (k < self.counts.size)
        out = np.where(inside, self.heights[np.clip(k, 0, self.counts.size - 1)], 0.0)
        return _scalar_or_array(x, out)

    __call__ = evaluate


def _bin_counts(x: np.ndarray, grid: BinGrid) -> tuple[int, np.ndarray]:
    j = grid.index(x)
    first = int(j.min())
    return first, np.bincount(j - first).astype(np.int64)


def fit_histogram(sample, grid: BinGrid) -> Histogram:
    x = as_sample(sample)
    first, counts = _bin_counts(x, grid)
    return Histogram(grid, first, counts, x.size)


# -- frequency polygon --------------------------------------------------------

@dataclass(frozen=True, eq=False)
class FrequencyPolygon:
    """Linear interpolation of histogram heights between bin midpoints.

    One zero-height knot is added on each side of the occupied bins so the
    polygon returns to zero and integrates to one.
    """

    base: Histogram

    @property
    def h(self) -> float:
        return self.base.h

    @cached_property
    def knots(self) -> tuple[np.ndarray, np.ndarray]:
        b = self.base
        j = np.arange(b.first - 1, b.first + b.counts.size + 1)
        heights = np.concatenate(([0.0], b.heights, [0.0]))
        return b.grid.midpoint(j), heights

    def evaluate(self, x):
        xa = np.asarray(x, dtype=float)
        if not np.all(np.isfinite(xa)):
            raise RejectedInputError("evaluation points must be finite")
        tx, ty = self.knots
        return _scalar_or_array(x, np.interp(xa, tx, ty, left=0.0, right=0.0))

    __call__ = evaluate

    def integral_sq(self) -> float:
        """Exact integral of the squared polygon."""
        _, a = self.knots
        return self.h * float(np.sum(a[:-1] ** 2 + a[:-1] * a[1:] + a[1:] ** 2)) / 3.0


def fit_frequency_polygon(sample, grid: BinGrid) -> FrequencyPolygon:
    return FrequencyPolygon(fit_histogram(sample, grid))


# -- kernel density estimator -------------------------------------------------

@dataclass(frozen=True, eq=False)
class Kde:
    data: np.ndarray      # sorted copy of the sample
    h: float
    kernel: Kernel

    @property
    def n(self) -> int:
        return self.data.size

    def evaluate(self, x, chunk: int = 1024):
        xa = np.atleast_1d(np.asarray(x, dtype=float))
        if not np.all(np.isfinite(xa)):
            raise RejectedInputError("evaluation points must be finite")
        flat = xa.ravel()
        out = np.empty(flat.size)
        d, h, k = self.data, self.h, self.kernel
        for s in range(0, flat.size, chunk):
            xs = flat[s:s + chunk]
            out[s:s + xs.size] = k._func((xs[:, None] - d[None, :]) / h).sum(axis=1)
        out /= self.n * h
        return _scalar_or_array(x, out.reshape(xa.shape))

    __call__ = evaluate

    def evaluate_grid(self, grid) -> np.ndarray:
        """Binned approximation of the estimate on a uniform grid.

        Gaussian only: data are linearly binned onto the grid spacing
        (extended to cover the data) and convolved with the sampled kernel,
        with relative error O((spacing / h)^2). Compact kernels are not
        smooth enough for binning and are evaluated exactly.
        """
        t = np.asarray(grid, dtype=float)
        delta = t[1] - t[0]
        if self.kernel.kind != "gaussian" or self.h < 4.0 * delta:
            return self.evaluate(t)
        reach = 8.0 * self.h
        lo = min(t[0], self.data[0] - reach)
        start = t[0] - math.ceil((t[0] - lo) / delta) * delta
        off = int(round((t[0] - start) / delta))
        counts = linear_bin(self.data, start, delta)
        if counts.size < off + t.size:
            counts = np.concatenate((counts, np.zeros(off + t.size - counts.size)))
        # kernel sampled on lags -L..L
        L = int(math.ceil(reach / delta))
        lags = np.arange(-L, L + 1) * delta
        w = self.kernel._func(lags / self.h)
        dens = fftconvolve(counts, w, mode="full")[L:L + counts.size]
        dens = np.maximum(dens, 0.0) / (self.n * self.h)
        # grid points sit at offsets off .. off+len(t)-1 of the binning lattice
        return dens[off:off + t.size]


def linear_bin(x: np.ndarray, start: float, delta: float) -> np.ndarray:
    """Linear binning of points onto the lattice ``start + k*delta``."""
    pos = (np.asarray(x, dtype=float) - start) / delta
    k = np.floor(pos).astype(np.int64)
    frac = pos - k
    size = int(k.max()) + 2
    return (np.bincount(k, weights=1.0 - frac, minlength=size)
            + np.bincount(k + 1, weights=frac, minlength=size))


def fit_kde(sample, h, kernel="gaussian") -> Kde:
    x = as_sample(sample)
    return Kde(np.sort(x), _check_bandwidth(h), get_kernel(kernel))


def fit(kind: str, sample, h, origin=None, kernel="gaussian"):
    """Fit a base estimator by kind (``hist``, ``fp`` or ``kde``)."""
    x = as_sample(sample)
    if kind == "kde":
        return fit_kde(x, h, kernel)
    grid = BinGrid(float(x.min()) if origin is None else float(origin), _check_bandwidth(h))
    if kind == "hist":
        return fit_histogram(x, grid)
    if kind == "fp":
        return fit_frequency_polygon(x, grid)
    raise InvalidParameterError(f"unknown estimator kind {kind!r}")


def evaluate_grid(est, grid) -> np.ndarray:
    """Evaluate any fitted estimator on a uniform grid (fast path for KDE)."""
    if isinstance(est, Kde):
        return est.evaluate_grid(grid)
    return np.asarray(est(np.asarray(grid, dtype=float)))
