"""Quick invariant checks on small instances, for ``bagdens selfcheck``."""

from __future__ import annotations

import math

import numpy as np

from bagdens.bagging import fit_bagged
from bagdens.bands import bootstrap_band_from_members
from bagdens.bandwidth import BandwidthRule, hist_cv, reference_bandwidth
from bagdens.estimators import (
    KERNELS,
    BinGrid,
    fit_frequency_polygon,
    fit_histogram,
    fit_kde,
)
from bagdens.models import MODELS
from bagdens.rng import RngStream


def _checks(seed: int):
    gen = RngStream(seed, 0).generator()
    x = gen.normal(size=200)

    hist = fit_histogram(x, BinGrid(float(x.min()), 0.37))
    mids = hist.grid.midpoint(hist.bins)
    yield "histogram unit mass", abs(float(np.sum(hist(mids))) * hist.h - 1.0) < 1e-12

    fp = fit_frequency_polygon(x, BinGrid(float(x.min()), 0.37))
    yield "polygon equals histogram at midpoints", bool(np.array_equal(fp(mids), hist(mids)))
    tx, ty = fp.knots
    yield "polygon unit mass", abs(float(np.trapezoid(ty, tx)) - 1.0) < 1e-9

    for name, k in KERNELS.items():
        r = k.radius if math.isfinite(k.radius) else 10.0
        u = np.linspace(-r, r, 200001)
        mass = float(np.trapezoid(k(u), u))
        yield f"{name} kernel integrates to 1", abs(mass - 1.0) < 1e-6

    kde = fit_kde(x[:50], 0.4)
    t = np.linspace(-3, 3, 7)
    naive = [sum(math.exp(-0.5 * ((ti - xi) / 0.4) ** 2) for xi in x[:50])
             / (50 * 0.4 * math.sqrt(2 * math.pi)) for ti in t]
    yield "kde matches naive sum", bool(np.allclose(kde(t), naive, rtol=0, atol=1e-12))

    small = x[:20]
    hs = reference_bandwidth(small, "hist") * np.array([0.5, 1.0, 2.0])
    yield "histogram cv is translation invariant", bool(
        np.allclose(hist_cv(small, hs), hist_cv(small + 3.0, hs), rtol=1e-10))

    e1 = fit_bagged(x, "fp", 8, BandwidthRule("reference"), rng=RngStream(seed, 1))
    e2 = fit_bagged(x, "fp", 8, BandwidthRule("reference"), rng=RngStream(seed, 1),
                    map_fn=lambda f, it: [f(b) for b in reversed(list(it))][::-1])
    yield "bagging independent of member order", bool(
        np.array_equal(e1.bandwidths, e2.bandwidths))

    vals = np.arange(1.0, 101.0)[:, None]
    band = bootstrap_band_from_members(vals, 0.10, np.array([0.0]))
    yield "percentile band order statistics", band.lower[0] == 5.0 and band.upper[0] == 95.0

    for model in MODELS.values():
        yield f"{model.id} pdf mass", abs(model.mass() - 1.0) < 1e-4


def run_selfcheck(seed: int = 20240101) -> bool:
    ok = True
    for name, passed in _checks(seed):
        print(f"{'PASS' if passed else 'FAIL'}  {name}")
        ok &= bool(passed)
    return ok
