import math

import mpmath
import numpy as np
import pytest
from scipy import integrate
from scipy.special import j0

from ncquasi.charfunc import AnalyticCf, CfRangeError, default_grid, estimate_cf
from ncquasi.filters import build_autocorrelation_filter, build_rectangular_filter
from ncquasi.quasiprob import NegativeVarianceError, bessel_j0, hankel_p, profile, variance_p
from ncquasi.spats import QuadratureDataset, SpatsParams, cf_theoretical, p_theoretical, sample_quadratures

SPATS = SpatsParams(0.49, 0.62)


@pytest.fixture(scope="module")
def w14():
    return build_autocorrelation_filter(1.4)


def test_bessel_reference_values():
    xs = np.concatenate([np.linspace(0, 20, 101), np.linspace(20, 500, 97), [2.404825557695773, 123.456]])
    ref = np.array([float(mpmath.besselj(0, mpmath.mpf(x))) for x in xs])
    assert np.max(np.abs(bessel_j0(xs) - ref)) < 1e-10
    assert bessel_j0(0.0) == 1.0
    assert abs(bessel_j0(2.404825557695773)) < 1e-10
    np.testing.assert_array_equal(bessel_j0(-xs), bessel_j0(xs))


def test_rect_large_cutoff_recovers_p():
    cf = AnalyticCf.spats(SpatsParams(0.49, 1.0))
    target = p_theoretical(SpatsParams(0.49, 1.0), 0.0)
    errs = [abs(hankel_p(cf, build_rectangular_filter(c), 0.0) - target) for c in (3.0, 5.0, 8.0)]
    assert errs[0] > errs[1] > errs[2]
    assert errs[2] < 1e-8


def test_vanishing_cutoff():
    cf = AnalyticCf.spats(SPATS)
    for alpha in (0.0, 1.0, 2.5):
        assert abs(hankel_p(cf, build_rectangular_filter(1e-3), alpha)) < 1e-6


@pytest.mark.parametrize("nbar", [0.1, 1.0, 5.0])
@pytest.mark.parametrize("w", [1.0, 1.4, 2.0])
def test_thermal_state_stays_nonnegative(nbar, w):
    prof = profile(AnalyticCf.thermal(nbar), build_autocorrelation_filter(w), np.linspace(0, 6, 121))
    assert prof.values.min() >= -1e-8


@pytest.mark.parametrize("alpha", [0.0, 0.5, 1.5])
def test_transform_against_adaptive_quadrature(w14, alpha):
    f = lambda b: (2 / math.pi) * b * j0(2 * b * alpha) * cf_theoretical(SPATS, b) * w14.value(b)
    ref, _ = integrate.quad(f, 0, w14.truncation_radius, epsabs=1e-13, limit=400)
    assert hankel_p(AnalyticCf.spats(SPATS), w14, alpha) == pytest.approx(ref, abs=1e-9)


def test_quadrature_convergence(w14):
    data = sample_quadratures(SPATS, 50_000, seed=4)
    cf = estimate_cf(data, default_grid(w14.truncation_radius))
    for source in (AnalyticCf.spats(SPATS), cf):
        for alpha in (0.0, 0.7, 2.0):
            a = hankel_p(source, w14, alpha, per_unit=32)
            b = hankel_p(source, w14, alpha, per_unit=64)
            assert abs(a - b) < 1e-7 * max(1.0, abs(a))


def test_normalization(w14):
    r, wr = np.polynomial.legendre.leggauss(400)
    r = 4 * (r + 1)
    wr = 4 * wr
    for filt in (w14, build_autocorrelation_filter(1.0)):
        prof = profile(AnalyticCf.spats(SPATS), filt, r)
        assert 2 * math.pi * np.sum(wr * r * prof.values) == pytest.approx(1.0, abs=1e-3)


def test_theoretical_profile_minimum_at_origin(w14):
    prof = profile(AnalyticCf.spats(SPATS), w14)
    assert np.argmin(prof.values) == 0
    assert prof.values[0] < 0


def test_profile_single_point_matches_scalars(w14):
    data = sample_quadratures(SPATS, 20_000, seed=8)
    cf = estimate_cf(data, default_grid(w14.truncation_radius))
    prof = profile(cf, w14, [0.0])
    p = hankel_p(cf, w14, 0.0)
    assert prof.values[0] == pytest.approx(p, rel=1e-13)
    assert prof.sigmas[0] ** 2 == pytest.approx(variance_p(cf, w14, 0.0, p), rel=1e-12)


def test_variance_scales_with_inverse_n(w14):
    cf = AnalyticCf.spats(SPATS)
    p = hankel_p(cf, w14, 0.0)
    v1 = variance_p(cf, w14, 0.0, p, count=10**5)
    v2 = variance_p(cf, w14, 0.0, p, count=10**10)
    assert v2 == pytest.approx(v1 * 1e-5, rel=1e-12)
    assert v2 < 1e-4 * v1


def brute_force_variance(x, filt, alpha):
    """Per-sample transform f(x_j); the double integral equals mean |f|^2 exactly."""
    r = filt.truncation_radius

    def f(xj):
        g = lambda b, part: (2 / math.pi) * b * j0(2 * b * alpha) * filt.value(b) * math.exp(b * b / 2) * part(b * xj)
        re = integrate.quad(g, 0, r, args=(math.cos,), limit=400, epsabs=1e-12)[0]
        im = integrate.quad(g, 0, r, args=(math.sin,), limit=400, epsabs=1e-12)[0]
        return complex(re, im)

    vals = np.array([f(xj) for xj in x])
    p = vals.mean().real
    return p, (np.mean(np.abs(vals) ** 2) - p * p) / x.size


@pytest.mark.parametrize("alpha", [0.0, 0.8])
def test_variance_against_per_sample_oracle(alpha):
    filt = build_autocorrelation_filter(1.0)
    x = sample_quadratures(SPATS, 40, seed=31).samples
    cf = estimate_cf(QuadratureDataset(x), default_grid(filt.truncation_radius))
    p_ref, var_ref = brute_force_variance(x, filt, alpha)
    p = hankel_p(cf, filt, alpha)
    assert p == pytest.approx(p_ref, rel=1e-5, abs=1e-7)
    assert variance_p(cf, filt, alpha, p) == pytest.approx(var_ref, rel=1e-4)


def test_rectangular_variance_against_oracle():
    filt = build_rectangular_filter(2.2)
    x = sample_quadratures(SPATS, 40, seed=32).samples
    cf = estimate_cf(QuadratureDataset(x), default_grid(2.2))
    p_ref, var_ref = brute_force_variance(x, filt, 0.0)
    p = hankel_p(cf, filt, 0.0)
    assert p == pytest.approx(p_ref, rel=1e-6)
    assert variance_p(cf, filt, 0.0, p) == pytest.approx(var_ref, rel=1e-4)


def test_oracle_equivalence_large_sample(w14):
    data = sample_quadratures(SPATS, 1_000_000, seed=41)
    cf = estimate_cf(data, default_grid(w14.truncation_radius))
    prof = profile(cf, w14)
    theory = profile(AnalyticCf.spats(SPATS), w14, prof.alpha_radii)
    inside = np.abs(prof.values - theory.values) < 4 * prof.sigmas
    assert inside.mean() >= 0.99


def test_sigmas_nonnegative_and_significance_finite(w14):
    data = sample_quadratures(SPATS, 100_000, seed=2)
    prof = profile(estimate_cf(data, default_grid(w14.truncation_radius)), w14)
    assert np.all(prof.sigmas >= 0)
    assert np.all(np.isfinite(prof.significance[prof.sigmas > 0]))


@pytest.mark.parametrize("w", [1.0, 1.4, 2.0])
def test_variance_integrand_peak_is_interior(w):
    filt = build_autocorrelation_filter(w)
    b = np.linspace(0, filt.truncation_radius, 4001)
    # diagonal of |Phi(b-b')| e^{bb'} Omega(b) Omega(b') with |Phi(0)| = 1
    diag = b * b + 2 * filt.log_value(b) + 2 * np.log(np.maximum(b, 1e-300))
    i = int(np.argmax(diag))
    assert 0 < i < b.size - 1 - int(0.02 / (b[1] - b[0]))


def test_negative_variance_detected(w14):
    cf = AnalyticCf.spats(SPATS)
    with pytest.raises(NegativeVarianceError):
        variance_p(cf, w14, 0.0, p_value=1e6, count=100)


def test_short_grid_rejected(w14):
    data = sample_quadratures(SPATS, 1000, seed=1)
    cf = estimate_cf(data, default_grid(3.0))
    with pytest.raises(CfRangeError):
        hankel_p(cf, w14, 0.0)


def test_no_count_means_zero_sigma(w14):
    prof = profile(AnalyticCf.spats(SPATS), w14, [0.0, 1.0])
    np.testing.assert_array_equal(prof.sigmas, 0.0)
    with pytest.raises(ValueError):
        variance_p(AnalyticCf.spats(SPATS), w14, 0.0, -0.1)
