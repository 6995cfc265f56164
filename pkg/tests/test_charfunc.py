import math

import numpy as np
import pytest

from ncquasi import _fallback
from ncquasi.charfunc import (AnalyticCf, CfRangeError, RadialCfEstimate, default_grid, estimate_cf)
from ncquasi.spats import QuadratureDataset, SpatsParams, cf_theoretical, sample_quadratures

SPATS = SpatsParams(0.49, 0.62)


@pytest.fixture(scope="module")
def data_1e5():
    return sample_quadratures(SPATS, 100_000, seed=21)


def test_origin_exact(data_1e5):
    est = estimate_cf(data_1e5, default_grid(3.0))
    assert est.radii[0] == 0.0
    assert est.values[0] == 1 + 0j
    assert est.variances[0] == 0.0


def test_single_zero_sample():
    est = estimate_cf(QuadratureDataset([0.0]), default_grid(4.0))
    np.testing.assert_array_equal(est.values.real, np.exp(est.radii**2 / 2))
    np.testing.assert_array_equal(est.values.imag, 0.0)
    np.testing.assert_array_equal(est.variances, 0.0)


def test_value_at_one_within_three_sigma(data_1e5):
    est = estimate_cf(data_1e5, default_grid(1.0))
    assert est.radii[-1] == pytest.approx(1.0)
    dev = abs(est.values[-1] - 0.05624)
    assert dev < 3 * math.sqrt(est.variances[-1])


def test_against_theory_large_sample():
    data = sample_quadratures(SPATS, 1_000_000, seed=22)
    est = estimate_cf(data, default_grid(3.0))
    dev = np.abs(est.values - cf_theoretical(SPATS, est.radii))
    sigma = np.sqrt(est.variances)
    inside = dev[1:] < 4 * sigma[1:]
    assert inside.mean() >= 0.99


def test_variance_formula_and_bound(data_1e5):
    est = estimate_cf(data_1e5, default_grid(5.0))
    n = data_1e5.count
    eq5 = (np.exp(est.radii**2) - np.abs(est.values) ** 2) / n
    np.testing.assert_allclose(est.variances, eq5, rtol=1e-9, atol=1e-15)
    assert np.all(est.variances <= np.exp(est.radii**2) / n)
    assert np.all(est.variances >= 0)


def test_variance_matches_ensemble():
    b_probe = [0.5, 1.5, 2.5]
    grid = default_grid(2.5)
    idx = [int(round(b / 0.02)) for b in b_probe]
    vals, preds = [], []
    for seed in range(500, 700):
        est = estimate_cf(sample_quadratures(SPATS, 10_000, seed), grid)
        vals.append(est.values[idx])
        preds.append(est.variances[idx])
    vals, preds = np.array(vals), np.array(preds)
    ensemble = np.mean(np.abs(vals - vals.mean(axis=0)) ** 2, axis=0)
    np.testing.assert_allclose(ensemble, preds.mean(axis=0), rtol=0.2)


def test_backends_agree(data_1e5):
    x = data_1e5.samples[:5000]
    grid = default_grid(6.0)
    compiled = estimate_cf(QuadratureDataset(x), grid).chi
    fallback = _fallback.quadrature_cf(x, 0.02, grid.size)
    direct = np.array([np.exp(1j * b * x).mean() for b in grid])
    np.testing.assert_allclose(compiled, direct, atol=1e-12)
    np.testing.assert_allclose(fallback, direct, atol=1e-12)


def test_nonuniform_grid_direct_path(data_1e5):
    grid = np.array([0.0, 0.1, 0.36, 1.0, 2.2])
    est = estimate_cf(data_1e5, grid)
    uniform = estimate_cf(data_1e5, default_grid(2.2))
    for b, v in zip(grid, est.values):
        assert v == pytest.approx(uniform.values[int(round(b / 0.02))], abs=1e-12)


@pytest.mark.parametrize("grid", [[0.1, 0.2], [0.0, 0.2, 0.1], [0.0, 0.0, 0.1], []])
def test_grid_validation(data_1e5, grid):
    with pytest.raises(ValueError):
        estimate_cf(data_1e5, grid)


def test_cf_at_nodes_and_conjugate(data_1e5):
    est = estimate_cf(data_1e5, default_grid(3.0))
    for i in (0, 7, 50, 150):
        assert est.cf_at(est.radii[i]) == est.values[i]
    b = est.radii[37]
    assert est.cf_at(-b) == np.conj(est.cf_at(b))
    with pytest.raises(CfRangeError):
        est.cf_at(3.5)


def test_cf_at_linear_midpoint():
    r = default_grid(2.0)
    linear = 0.3 + 1.7 * r + 1j * (0.2 - 0.5 * r)
    est = RadialCfEstimate(radii=r, chi=linear * np.exp(-r**2 / 2), source_count=10)
    mid = 0.5 * (r[10] + r[11])
    assert est.cf_at(mid) == pytest.approx(0.5 * (linear[10] + linear[11]), abs=1e-12)


def test_imag_diagnostic_order_one(data_1e5):
    est = estimate_cf(data_1e5, default_grid(3.0))
    assert 0 < est.imag_diagnostic() < 6


def test_analytic_cf_quadrature_chi():
    cf = AnalyticCf.spats(SPATS)
    k = np.array([-1.3, 0.0, 0.7])
    np.testing.assert_allclose(cf.quadrature_chi(k), np.exp(-k**2 / 2) * cf_theoretical(SPATS, np.abs(k)),
                               rtol=1e-14)
    thermal = AnalyticCf.thermal(0.7)
    np.testing.assert_allclose(thermal.cf_at(k), np.exp(-0.7 * k**2), rtol=1e-15)
