import math

import numpy as np
import pytest

from bagdens.bagging import fit_bagged
from bagdens.bandwidth import BandwidthRule
from bagdens.bands import (
    Band,
    bootstrap_band,
    bootstrap_band_from_members,
    hist_band,
    hist_half_width,
    kde_band,
    kde_standard_error,
    sqrt_scale_band,
    upper_quantile,
)
from bagdens.errors import InvalidParameterError
from bagdens.estimators import BinGrid, fit_histogram, fit_kde
from bagdens.rng import RngStream


def _erf_upper_quantile(q):
    # bisection on the complementary error function, independent of scipy
    lo, hi = -40.0, 40.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if 0.5 * math.erfc(mid / math.sqrt(2)) > q:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


@pytest.mark.parametrize("q", [0.5, 0.1, 0.025, 0.0025, 1e-4, 1e-7])
def test_upper_quantile(q):
    assert abs(upper_quantile(q) - _erf_upper_quantile(q)) <= 1e-6


def test_hist_half_width_example():
    c = hist_half_width(10, 1000, 0.05)
    assert c == pytest.approx(_erf_upper_quantile(0.0025) / 2 * 0.1, abs=1e-9)
    assert c == pytest.approx(0.14035, abs=5e-6)


def test_sqrt_scale_band_algebra():
    c = 0.14
    b = sqrt_scale_band([0.0, 0.5, 2.0], c, [0.0, 1.0, 2.0])
    assert b.lower[0] == 0.0 and b.upper[0] == pytest.approx(c * c)
    for i in (1, 2):
        f = [0.0, 0.5, 2.0][i]
        assert b.upper[i] - b.lower[i] == pytest.approx(4 * c * math.sqrt(f), rel=1e-12)


def test_hist_band_uses_bin_count(rng):
    x = rng.normal(size=1000)
    est = fit_histogram(x, BinGrid(float(x.min()), 0.5))
    t = np.linspace(-4, 4, 201)
    band = hist_band(est, 0.05, t)
    c = hist_half_width(est.counts.size, 1000, 0.05)
    root = np.sqrt(est(t))
    np.testing.assert_allclose(band.upper, (root + c) ** 2, rtol=1e-14)
    np.testing.assert_allclose(band.lower, np.maximum(root - c, 0) ** 2, rtol=1e-14)
    assert band.level == 0.95
    with pytest.raises(InvalidParameterError):
        hist_band(est, 1.5, t)
    with pytest.raises(InvalidParameterError):
        hist_band(est, 0.05, t, m=0)


def test_kde_band_example():
    x = np.random.default_rng(0).normal(size=1000)
    est = fit_kde(x, 0.25)
    se = kde_standard_error(est)
    assert se == pytest.approx(math.sqrt(0.28209479177387814 / 1000), rel=1e-12)
    assert se == pytest.approx(0.016796, abs=5e-7)
    width = 4 * 2 * se * math.sqrt(0.4)
    # 8 * 0.016796 * sqrt(0.4) = 0.084980; the quoted 0.08497 is a rounding slip
    assert width == pytest.approx(0.08497, rel=2e-4)
    b = sqrt_scale_band([0.4, 0.0], 2 * se, [0.0, 1.0])
    assert b.upper[0] - b.lower[0] == pytest.approx(width, rel=1e-12)
    assert b.lower[1] == 0 and b.upper[1] == pytest.approx((2 * se) ** 2)


def test_kde_band_limits(rng):
    x = rng.normal(size=200)
    est = fit_kde(x, 0.3)
    t = np.linspace(-3, 3, 61)
    b = kde_band(est, 1e-12, t)
    np.testing.assert_allclose(b.lower, est(t), atol=1e-10)
    np.testing.assert_allclose(b.upper, est(t), atol=1e-10)
    with pytest.raises(InvalidParameterError):
        kde_band(est, 0.0, t)


def test_order_statistics_example():
    vals = np.arange(1.0, 101.0)[:, None]
    band = bootstrap_band_from_members(np.random.default_rng(1).permutation(vals), 0.10, [0.0])
    assert band.lower[0] == 5.0 and band.upper[0] == 95.0


def test_order_statistic_clamp():
    vals = np.array([[3.0], [1.0], [2.0]])
    band = bootstrap_band_from_members(vals, 0.01, [0.0])
    assert band.lower[0] == 1.0 and band.upper[0] == 3.0
    with pytest.raises(InvalidParameterError):
        bootstrap_band_from_members(vals[:1], 0.05, [0.0])


def test_identical_members_collapse():
    vals = np.tile([0.1, 0.2, 0.3], (50, 1))
    band = bootstrap_band_from_members(vals, 0.05, [0.0, 1.0, 2.0])
    assert np.array_equal(band.lower, band.upper)
    assert np.array_equal(band.lower, vals[0])


def test_bootstrap_band_nesting_and_containment(rng):
    x = rng.normal(size=150)
    ens = fit_bagged(x, "kde", 60, BandwidthRule("reference"), rng=RngStream(6))
    t = np.linspace(-3, 3, 51)
    wide = bootstrap_band(ens, 0.05, t)
    narrow = bootstrap_band(ens, 0.5, t)
    assert np.all(wide.lower <= narrow.lower) and np.all(narrow.upper <= wide.upper)
    v = ens.member_values(t)
    assert np.all(wide.lower >= v.min(axis=0)) and np.all(wide.upper <= v.max(axis=0))
    assert np.all(wide.lower <= wide.upper)


def test_analytic_bands_bracket_estimate(rng):
    x = rng.normal(size=300)
    t = np.linspace(-4, 4, 81)
    est = fit_kde(x, 0.3)
    b = kde_band(est, 2.0, t)
    assert np.all(b.lower <= est(t) + 1e-15) and np.all(est(t) <= b.upper)
    h = fit_histogram(x, BinGrid(float(x.min()), 0.4))
    hb = hist_band(h, 0.05, t)
    assert np.all(hb.lower <= h(t)) and np.all(h(t) <= hb.upper)
    assert np.all(b.lower >= 0) and np.all(hb.lower >= 0)


def test_translation_equivariance(rng):
    x = rng.normal(size=200)
    t = np.linspace(-3, 3, 61)
    c = 4.25
    a = kde_band(fit_kde(x, 0.3), 2.0, t)
    b = kde_band(fit_kde(x + c, 0.3), 2.0, t + c)
    np.testing.assert_allclose(a.lower, b.lower, rtol=0, atol=1e-12)
    np.testing.assert_allclose(a.upper, b.upper, rtol=0, atol=1e-12)
    ha = hist_band(fit_histogram(x, BinGrid(float(x.min()), 0.4)), 0.05, t)
    hb = hist_band(fit_histogram(x + c, BinGrid(float(x.min()) + c, 0.4)), 0.05, t + c)
    np.testing.assert_allclose(ha.lower, hb.lower, rtol=0, atol=1e-12)
    np.testing.assert_allclose(ha.upper, hb.upper, rtol=0, atol=1e-12)


def test_band_validation():
    with pytest.raises(InvalidParameterError):
        Band([0.0, 1.0], [0.0], [1.0])
    with pytest.raises(InvalidParameterError):
        Band([1.0, 0.0], [0.0, 0.0], [1.0, 1.0])
    with pytest.raises(InvalidParameterError):
        Band([0.0, 1.0], [0.0, 2.0], [1.0, 1.0])
