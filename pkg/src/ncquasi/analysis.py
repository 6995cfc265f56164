"""Significance, filter-width optimization, and the loss and cutoff studies."""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .charfunc import AnalyticCf, default_grid, estimate_cf
from .filters import (NonclassicalityFilter, build_autocorrelation_filter,
                      build_rectangular_filter, gauss_legendre_panels)
from .quasiprob import DEFAULT_ALPHA_GRID, QuasiprobProfile, bessel_j0, profile
from .spats import SpatsParams, cf_theoretical, sample_quadratures, wigner_origin

#: Seeds used for every statistical acceptance run.
DEFAULT_SEEDS = tuple(range(1, 11))
DEFAULT_WIDTHS = tuple(np.round(np.arange(0.6, 2.4 + 1e-9, 0.1), 10))


def significance(prof: QuasiprobProfile) -> tuple[float, float]:
    """Most negative ``P / sigma`` on the grid and the ``|alpha|`` where it occurs."""
    ok = prof.sigmas > 0
    if not np.any(ok):
        raise ValueError("profile has no point with non-zero standard deviation")
    s = np.where(ok, prof.values / np.where(ok, prof.sigmas, 1.0), np.inf)
    i = int(np.argmin(s))
    return float(s[i]), float(prof.alpha_radii[i])


def _map(fn, items, threads):
    if threads > 1 and len(items) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(fn, items))
    return [fn(item) for item in items]


def reconstruct(data, filt: NonclassicalityFilter, alpha_grid=None) -> QuasiprobProfile:
    """Estimate the characteristic function out to the filter support and transform it."""
    cf = estimate_cf(data, default_grid(filt.truncation_radius))
    return profile(cf, filt, alpha_grid)


@dataclass(frozen=True)
class WidthScanResult:
    widths: np.ndarray
    significances: np.ndarray
    alpha_at_min: np.ndarray
    best_width: float

    @property
    def best_significance(self) -> float:
        i = int(np.flatnonzero(self.widths == self.best_width)[0])
        return float(self.significances[i])

    def rows(self):
        return list(zip(self.widths.tolist(), self.significances.tolist(), self.alpha_at_min.tolist()))


def scan_width(data, widths=DEFAULT_WIDTHS, alpha_grid=None, threads: int = 1) -> WidthScanResult:
    """Most negative significance for each autocorrelation filter width.

    The characteristic function is estimated once, out to the widest filter's
    truncation radius. Ties for the best width go to the smaller width.
    """
    widths = np.asarray(widths, dtype=float)
    if widths.size == 0 or np.any(widths <= 0):
        raise ValueError("need a non-empty list of positive widths")
    filters = [build_autocorrelation_filter(w) for w in widths]
    cf = estimate_cf(data, default_grid(max(f.truncation_radius for f in filters)))
    results = _map(lambda f: significance(profile(cf, f, alpha_grid)), filters, threads)
    s = np.array([r[0] for r in results])
    where = np.array([r[1] for r in results])
    best = min(range(widths.size), key=lambda i: (s[i], widths[i]))
    return WidthScanResult(widths, s, where, float(widths[best]))


@dataclass(frozen=True)
class SystematicErrorBand:
    alpha_radii: np.ndarray
    bias: np.ndarray
    cutoff: float

    @property
    def max_abs(self) -> float:
        return float(np.max(np.abs(self.bias)))


def _cf_tail_end(params, threshold=1e-12):
    b = np.linspace(0.0, 60.0, 60001)
    big = np.flatnonzero(np.abs(cf_theoretical(params, b)) >= threshold)
    return float(b[big[-1] + 1])


def rect_systematic_error(reference: SpatsParams, cutoff: float, alpha_grid=None,
                          per_unit: int = 32) -> SystematicErrorBand:
    """Transform of the characteristic-function tail that a cutoff discards.

    ``bias(alpha) = (2/pi) int_cutoff^inf b J0(2 b alpha) Phi_th(b) db`` with
    the theoretical characteristic function of ``reference``; the integral
    stops where ``|Phi_th| < 1e-12``.
    """
    if not cutoff > 0:
        raise ValueError("cutoff must be > 0")
    alphas = np.atleast_1d(DEFAULT_ALPHA_GRID if alpha_grid is None else np.asarray(alpha_grid, float))
    end = _cf_tail_end(reference)
    if cutoff >= end:
        return SystematicErrorBand(alphas.copy(), np.zeros_like(alphas), float(cutoff))
    b, w = gauss_legendre_panels(end, per_unit, b_min=cutoff)
    amp = w * b * cf_theoretical(reference, b)
    bias = (2 / math.pi) * amp @ bessel_j0(2 * np.outer(b, alphas))
    return SystematicErrorBand(alphas.copy(), bias, float(cutoff))


def efficiency_rescale_check(params: SpatsParams, width: float, alpha_grid=None) -> float:
    """Largest deviation between ``eta P(alpha; eta, w)`` and ``P(alpha/sqrt(eta); 1, sqrt(eta) w)``.

    Both sides are computed from exact characteristic functions.
    """
    alphas = np.atleast_1d(DEFAULT_ALPHA_GRID if alpha_grid is None else np.asarray(alpha_grid, float))
    eta = params.eta
    lossy = profile(AnalyticCf.spats(params), build_autocorrelation_filter(width), alphas)
    ideal = profile(AnalyticCf.spats(SpatsParams(params.nbar, 1.0)),
                    build_autocorrelation_filter(math.sqrt(eta) * width), alphas / math.sqrt(eta))
    return float(np.max(np.abs(eta * lossy.values - ideal.values)))


@dataclass(frozen=True)
class EfficiencyRow:
    eta: float
    mean_significance: float
    per_seed: tuple
    widths: tuple
    wigner_origin: float

    @property
    def wigner_sign(self) -> int:
        return int(np.sign(self.wigner_origin)) if abs(self.wigner_origin) > 1e-12 else 0


def seed_significances(params: SpatsParams, n: int, seeds, widths, alpha_grid=None, threads: int = 1):
    """Per-seed best significance and the width that achieved it.

    ``widths`` is either a single width or a sequence to scan per seed.
    """
    if np.ndim(widths) == 0:
        filt = build_autocorrelation_filter(float(widths))

        def one(seed):
            data = sample_quadratures(params, n, seed)
            return significance(reconstruct(data, filt, alpha_grid))[0], float(widths)
    else:
        def one(seed):
            res = scan_width(sample_quadratures(params, n, seed), widths, alpha_grid)
            return res.best_significance, res.best_width
    return _map(one, list(seeds), threads)


def efficiency_sweep(nbar: float, etas, n: int = 100_000, seeds=DEFAULT_SEEDS, widths=DEFAULT_WIDTHS,
                     alpha_grid=None, threads: int = 1) -> list[EfficiencyRow]:
    """Mean best significance over seeds for each efficiency, with the Wigner origin."""
    etas = list(etas)
    seeds = list(seeds)
    if not etas or not seeds:
        raise ValueError("need at least one efficiency and one seed")
    rows = []
    for eta in etas:
        params = SpatsParams(nbar, eta)
        res = seed_significances(params, n, seeds, widths, alpha_grid, threads)
        s = tuple(r[0] for r in res)
        rows.append(EfficiencyRow(float(eta), float(np.mean(s)), s, tuple(r[1] for r in res),
                                  wigner_origin(params)))
    return rows


def rect_comparison(data, cutoff: float, alpha_grid=None):
    """Rectangular reconstruction together with its a-priori systematic error."""
    filt = build_rectangular_filter(cutoff)
    prof = reconstruct(data, filt, alpha_grid)
    band = rect_systematic_error(data.params, cutoff, prof.alpha_radii)
    return prof, band

