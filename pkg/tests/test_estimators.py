import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from numpy.testing import assert_allclose
from scipy.integrate import quad

from bagdens.bandwidth import reference_bandwidth
from bagdens.errors import InvalidParameterError, RejectedInputError
from bagdens.estimators import (
    KERNELS,
    BinGrid,
    fit,
    fit_frequency_polygon,
    fit_histogram,
    fit_kde,
    get_kernel,
    kernel_constants,
)

finite = st.floats(-1e3, 1e3, allow_nan=False, allow_infinity=False)
samples = st.lists(finite, min_size=2, max_size=60)
widths = st.floats(1e-2, 50.0)


# -- histogram -------------------------------------------------------------------

def test_histogram_counts_single_bin():
    est = fit_histogram([0.25, 0.75], BinGrid(0.0, 1.0))
    assert est.count_map() == {0: 2}


def test_histogram_counts_negative_bin():
    est = fit_histogram([-0.5, 0.5], BinGrid(0.0, 1.0))
    assert est.count_map() == {-1: 1, 0: 1}


def test_histogram_right_endpoint_goes_to_next_bin():
    est = fit_histogram([1.0], BinGrid(0.0, 1.0))
    assert est.count_map() == {1: 1}


def test_histogram_uniform_bin_frequencies(rng):
    n = 1000
    x = rng.random(n)
    est = fit_histogram(x, BinGrid(0.0, 0.1))
    counts = est.count_map()
    tol = 4 * math.sqrt(0.1 * 0.9 / n)
    for j in range(10):
        assert abs(counts.get(j, 0) / n - 0.1) <= tol


def test_histogram_eval():
    est = fit_histogram([0.25, 0.75], BinGrid(0.0, 1.0))
    assert est(0.5) == 1.0
    assert est(5.0) == 0.0
    est = fit_histogram([0.1, 0.2, 0.3, 0.7], BinGrid(0.0, 0.5))
    assert est.count_map() == {0: 3, 1: 1}
    assert est(0.6) == pytest.approx(0.5)


def test_histogram_rejects_bad_input():
    with pytest.raises(RejectedInputError):
        fit_histogram([0.0, np.nan], BinGrid(0.0, 1.0))
    with pytest.raises(InvalidParameterError):
        BinGrid(0.0, 0.0)
    with pytest.raises(InvalidParameterError):
        BinGrid(0.0, -1.0)
    est = fit_histogram([0.0, 1.0], BinGrid(0.0, 1.0))
    with pytest.raises(RejectedInputError):
        est(np.inf)


@given(samples, widths, finite)
def test_histogram_mass_and_counts(xs, h, origin):
    est = fit_histogram(xs, BinGrid(origin, h))
    assert est.counts.sum() == len(xs)
    assert np.all(est.counts >= 0)
    mids = est.grid.midpoint(est.bins)
    assert abs(float(np.sum(est(mids))) * h - 1.0) < 1e-12


# -- frequency polygon ----------------------------------------------------------

def test_fp_interpolates_between_midpoints():
    # heights 1.0 (bin 0) and 0.0 (bin 1): single point in bin 0 with n=1, h=1
    fp = fit_frequency_polygon([0.5], BinGrid(0.0, 1.0))
    assert fp(0.5) == 1.0
    assert fp(1.0) == pytest.approx(0.5)
    assert fp(1.25) == pytest.approx(0.25)
    assert fp(100.0) == 0.0
    assert fp(-100.0) == 0.0


def test_fp_knot_values_exact(rng):
    x = rng.normal(size=100)
    fp = fit_frequency_polygon(x, BinGrid(-0.3, 0.4))
    tx, ty = fp.knots
    assert np.array_equal(fp(tx), ty)


def test_fp_normal_mass(rng):
    x = rng.normal(size=10000)
    h = reference_bandwidth(x, "fp")
    fp = fit_frequency_polygon(x, BinGrid(float(x.min()), h))
    t = np.linspace(-8, 8, 4001)
    mass = np.trapezoid(fp(t), t)
    assert 0.995 <= mass <= 1.005


@given(samples, widths, finite)
def test_fp_matches_histogram_at_midpoints(xs, h, origin):
    grid = BinGrid(origin, h)
    fp = fit_frequency_polygon(xs, grid)
    hist = fit_histogram(xs, grid)
    mids = grid.midpoint(hist.bins)
    assert np.array_equal(fp(mids), hist(mids))
    tx, ty = fp.knots
    assert np.all(ty >= 0)
    assert 0.999 <= np.trapezoid(ty, tx) <= 1.001


def test_fp_integral_sq_exact(rng):
    x = rng.normal(size=50)
    fp = fit_frequency_polygon(x, BinGrid(float(x.min()), 0.5))
    tx, _ = fp.knots
    # piecewise quadratic: Simpson on each segment is exact
    total = 0.0
    for a, b in zip(tx[:-1], tx[1:]):
        m = 0.5 * (a + b)
        total += (b - a) / 6 * (fp(a) ** 2 + 4 * fp(m) ** 2 + fp(b) ** 2)
    assert fp.integral_sq() == pytest.approx(total, rel=1e-12)


# -- kernels ----------------------------------------------------------------------

@pytest.mark.parametrize("kind", sorted(KERNELS))
def test_kernel_properties(kind):
    k = get_kernel(kind)
    r = k.radius if math.isfinite(k.radius) else np.inf
    lo, hi = (-r, r) if math.isfinite(r) else (-np.inf, np.inf)
    assert quad(k, lo, hi)[0] == pytest.approx(1.0, abs=1e-8)
    u = np.linspace(-3, 3, 601)
    assert np.all(k(u) >= 0)
    assert_allclose(k(u), k(-u), rtol=0, atol=0)


@pytest.mark.parametrize("kind", sorted(KERNELS))
def test_kernel_constants_by_quadrature(kind):
    k = get_kernel(kind)
    lo, hi = (-k.radius, k.radius) if math.isfinite(k.radius) else (-np.inf, np.inf)
    l2 = quad(lambda u: k(u) ** 2, lo, hi)[0]
    mu2 = quad(lambda u: u * u * k(u), lo, hi)[0]
    got_l2, got_mu2 = kernel_constants(kind)
    assert got_l2 == pytest.approx(l2, abs=1e-8)
    assert got_mu2 == pytest.approx(mu2, abs=1e-8)


def test_kernel_constants_closed_form():
    assert kernel_constants("gaussian") == pytest.approx((1 / (2 * math.sqrt(math.pi)), 1.0))
    assert kernel_constants("gaussian")[0] == pytest.approx(0.28209, abs=1e-5)
    assert kernel_constants("epanechnikov") == pytest.approx((0.6, 0.2))
    assert kernel_constants("rectangular") == pytest.approx((0.5, 1 / 3))


# -- KDE --------------------------------------------------------------------------

def test_kde_single_point():
    assert fit_kde([0.0], 1.0)(0.0) == pytest.approx(1 / math.sqrt(2 * math.pi), abs=1e-15)
    rect = fit_kde([0.0], 1.0, "rectangular")
    assert rect(0.0) == 0.5
    assert rect(1.5) == 0.0


def test_kde_rectangular_inclusive_support():
    assert fit_kde([-1.0, 1.0], 1.0, "rectangular")(0.0) == 0.5


def test_kde_rejects_bad_bandwidth():
    for h in (0.0, -1.0, np.nan, np.inf):
        with pytest.raises(InvalidParameterError):
            fit_kde([0.0, 1.0], h)


def _naive_kde(data, h, kernel, x):
    total = 0.0
    for xi in data:
        total += float(kernel((x - xi) / h))
    return total / (len(data) * h)


@pytest.mark.parametrize("kind", sorted(KERNELS))
def test_kde_matches_two_loop_reference(kind, rng):
    k = get_kernel(kind)
    for _ in range(25):
        n = int(rng.integers(1, 40))
        data = rng.normal(size=n) * rng.uniform(0.1, 5)
        h = float(rng.uniform(0.05, 2.0))
        x = float(rng.normal() * 3)
        est = fit_kde(data, h, kind)
        assert abs(est(x) - _naive_kde(data, h, k, x)) <= 1e-12


def test_kde_symmetric_in_data_order_and_positive():
    a = fit_kde([0.3, -1.2], 0.4)
    b = fit_kde([-1.2, 0.3], 0.4)
    t = np.linspace(-30, 30, 61)
    assert np.array_equal(a(t), b(t))
    assert np.all(fit_kde([0.3, -1.2], 0.4)(np.linspace(-5, 5, 11)) > 0)


@pytest.mark.parametrize("kind", sorted(KERNELS))
def test_kde_mass(kind, rng):
    x = rng.normal(size=300)
    h = 0.3
    est = fit_kde(x, h, kind)
    reach = 8 * h if kind == "gaussian" else 6 * h
    t = np.linspace(x.min() - reach, x.max() + reach, 200001)
    mass = np.trapezoid(est(t), t)
    assert 0.999 <= mass <= 1.0 + 1e-9


@pytest.mark.parametrize("kind", sorted(KERNELS))
@pytest.mark.parametrize("h", [0.05, 0.3, 1.5])
def test_kde_grid_evaluation_matches_exact(kind, h, rng):
    x = rng.normal(size=400)
    est = fit_kde(x, h, kind)
    t = np.linspace(-5, 5, 1001)
    exact = est(t)
    approx = est.evaluate_grid(t)
    # binning error peaks near h = 4 * spacing, the fast-path threshold
    assert np.max(np.abs(approx - exact)) <= 2e-3 * exact.max()
    assert np.trapezoid((approx - exact) ** 2, t) <= 1e-5 * np.trapezoid(exact ** 2, t)


def test_kde_grid_fast_path_data_outside_grid(rng):
    x = np.r_[rng.normal(size=100), 9.0, -12.0]
    est = fit_kde(x, 0.5)
    t = np.linspace(-5, 5, 501)
    assert_allclose(est.evaluate_grid(t), est(t), atol=2e-3 * est(t).max())


def test_evaluations_are_pure(rng):
    x = rng.normal(size=50)
    t = np.linspace(-3, 3, 31)
    for kind in ("hist", "fp", "kde"):
        est = fit(kind, x, 0.4)
        assert np.array_equal(est(t), est(t))
