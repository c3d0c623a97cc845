"""Bootstrap aggregation of density estimators, and RASH.

A bagged estimator averages B base estimators, each fitted on a bootstrap
resample with its own bandwidth (``refit``) or a shared one (``fixed``).
Member ``b`` always draws from ``rng.child(b)``, so members can be fitted in
any order or in parallel with identical results.
"""

from __future__ import annotations

from dataclasses import dataclass
import numpy as np

from bagdens.bandwidth import BandwidthRule, select_bandwidth
from bagdens.errors import DegenerateSampleError, InvalidParameterError
from bagdens.estimators import BinGrid, as_sample, evaluate_grid, fit, fit_histogram
from bagdens.rng import RngStream

DEFAULT_B = 200
KINDS = ("hist", "fp", "kde")


def _generator(rng) -> np.random.Generator:
    return rng.generator() if isinstance(rng, RngStream) else rng


def bootstrap_resample(sample, rng) -> np.ndarray:
    """Draw ``n`` points uniformly with replacement from ``sample``."""
    x = np.asarray(sample, dtype=float).ravel()
    if x.size == 0:
        raise InvalidParameterError("cannot resample an empty sample")
    idx = _generator(rng).integers(0, x.size, x.size)
    return x[idx]


@dataclass(frozen=True, eq=False)
class BaggedEnsemble:
    members: tuple
    kind: str

    def __post_init__(self):
        if len(self.members) < 1:
            raise InvalidParameterError("an ensemble needs at least one member")

    @property
    def B(self) -> int:
        return len(self.members)

    @property
    def bandwidths(self) -> np.ndarray:
        return np.array([m.h for m in self.members])

    def member_values(self, x) -> np.ndarray:
        """Member evaluations, shape ``(B,) + shape(x)``, in member order."""
        return np.stack([np.asarray(m(x), dtype=float) for m in self.members])

    def member_grid_values(self, grid) -> np.ndarray:
        return np.stack([evaluate_grid(m, grid) for m in self.members])

    def evaluate(self, x):
        out = self.member_values(x).mean(axis=0)
        return float(out) if np.ndim(x) == 0 else out

    __call__ = evaluate

    def evaluate_grid(self, grid) -> np.ndarray:
        return self.member_grid_values(grid).mean(axis=0)

    def prefix(self, B: int) -> "BaggedEnsemble":
        return BaggedEnsemble(self.members[:B], self.kind)


def fit_member(sample: np.ndarray, kind: str, rule: BandwidthRule, kernel, rng,
               fallback_h: float | None = None, grid_origin: float | None = None):
    """Fit one bootstrap member; ``rng`` is the member's own stream."""
    boot = bootstrap_resample(sample, rng)
    try:
        h = select_bandwidth(boot, kind, rule, kernel)
    except DegenerateSampleError:
        if fallback_h is None:
            fallback_h = select_bandwidth(sample, kind, rule, kernel)
        h = fallback_h
    origin = float(boot.min()) if grid_origin is None else grid_origin
    return fit(kind, boot, h, origin=origin, kernel=kernel)


def fit_bagged(sample, kind: str, B: int = DEFAULT_B, rule: BandwidthRule | None = None,
               kernel="gaussian", rng: RngStream | None = None, *,
               grid_origin: float | None = None, map_fn=map) -> BaggedEnsemble:
    """Bag ``B`` estimators of ``kind`` fitted on bootstrap resamples.

    ``grid_origin`` pins the histogram/FP origin for every member (default:
    minimum of each resample). ``map_fn`` may be an executor's ``map`` to
    fit members concurrently; results do not depend on it.
    """
    if kind not in KINDS:
        raise InvalidParameterError(f"unknown estimator kind {kind!r}")
    if B < 1:
        raise InvalidParameterError("B must be >= 1")
    if rng is None:
        raise InvalidParameterError("an explicit RngStream is required")
    x = as_sample(sample)
    rule = rule or BandwidthRule()
    fallback = None
    if rule.kind != "fixed" and np.ptp(x) == 0:
        raise DegenerateSampleError("sample has zero variance")

    def one(b):
        return fit_member(x, kind, rule, kernel, rng.child(b), fallback, grid_origin)

    return BaggedEnsemble(tuple(map_fn(one, range(B))), kind)


def fit_rash(sample, h: float, B: int, rng: RngStream | None = None,
             origin: float | None = None, shifts=None) -> BaggedEnsemble:
    """Average of B histograms on the full sample, grids shifted by U[0, h).

    Explicit ``shifts`` (length B) replace the random translations.
    """
    x = as_sample(sample)
    if B < 1:
        raise InvalidParameterError("B must be >= 1")
    base = float(x.min()) if origin is None else float(origin)
    if shifts is None:
        if rng is None:
            raise InvalidParameterError("an explicit RngStream is required")
        shifts = _generator(rng).random(B) * h
    elif len(shifts) != B:
        raise InvalidParameterError("need exactly B shifts")
    members = tuple(fit_histogram(x, BinGrid(base + s, h)) for s in shifts)
    return BaggedEnsemble(members, "hist")
