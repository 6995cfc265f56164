"""Filtered quasiprobabilities and their sampling variance.

For a radially symmetric state the filtered quasiprobability is the Hankel
transform

    P(alpha) = (2/pi) int_0^inf b J0(2 b |alpha|) Phi(b) Omega(b) db

and its variance from N samples is

    sigma^2 = (1/N) [ (4/pi^2) iint b b' J0(2b|alpha|) J0(2b'|alpha|)
                      Phi(b - b') e^{b b'} Omega(b) Omega(b') db db' - P^2 ].

Both integrals are truncated at the filter's truncation radius and evaluated
with composite Gauss-Legendre rules. ``Phi(b - b') e^{b b'}`` is rewritten as
``chi(b - b') exp((b^2 + b'^2)/2)`` with the bounded quadrature characteristic
function ``chi``, and the exponentials are merged with ``log Omega`` so that
wide filters do not overflow.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import j0

from .charfunc import CfRangeError
from .filters import NonclassicalityFilter, gauss_legendre_panels

NODES_PER_UNIT = 32
DEFAULT_ALPHA_GRID = np.linspace(0.0, 3.0, 61)


class NegativeVarianceError(ArithmeticError):
    """The variance integral came out negative beyond round-off."""


def bessel_j0(x):
    """Bessel function of the first kind, order zero (cephes via scipy)."""
    return j0(x)


@dataclass(frozen=True, eq=False)
class QuasiprobProfile:
    alpha_radii: np.ndarray
    values: np.ndarray
    sigmas: np.ndarray
    filter: dict
    source_count: int | None
    settings: dict = field(default_factory=dict)

    @property
    def significance(self) -> np.ndarray:
        with np.errstate(divide="ignore", invalid="ignore"):
            return np.where(self.sigmas > 0, self.values / self.sigmas, np.nan)


class _Quadrature:
    """Nodes, weights and log-scaled amplitudes shared by transform and variance."""

    def __init__(self, cf, filt: NonclassicalityFilter, per_unit: int):
        b_max = filt.truncation_radius
        if not math.isfinite(b_max):
            raise ValueError("filter has no finite truncation radius")
        if cf.max_radius < b_max * (1 - 1e-12):
            raise CfRangeError(
                f"characteristic function covers b <= {cf.max_radius:.6g} but the "
                f"filter needs b <= {b_max:.6g}")
        self.b_max = b_max
        self.per_unit = per_unit
        self.b, self.w = gauss_legendre_panels(b_max, per_unit)
        self.expo = 0.5 * self.b**2 + filt.log_value(self.b)
        self.peak = float(self.expo.max())
        self.chi = cf.quadrature_chi(self.b)
        self.cf = cf

    def bessel(self, alphas):
        return j0(2.0 * np.outer(self.b, alphas))

    def transform(self, bessel):
        amp = self.w * self.b * np.exp(self.expo) * self.chi
        return (2.0 / math.pi) * (amp @ bessel)

    def second_moment(self, bessel):
        """Scaled double integral and the integrand maximum, both times ``exp(-2 peak)``."""
        r = self.b * np.exp(self.expo - self.peak)
        diff = self.b[:, None] - self.b[None, :]
        kernel = np.real(self.cf.quadrature_chi(diff))
        kernel = 0.5 * (kernel + kernel.T)
        integrand = np.outer(r, r) * kernel
        weighted = np.outer(self.w, self.w) * integrand
        moment = (4.0 / math.pi**2) * np.einsum("ia,ij,ja->a", bessel, weighted, bessel)
        return moment, float(np.max(np.abs(integrand)))


def _variance(quad, values, moment, integrand_max, count):
    scaled = moment - (values * math.exp(-quad.peak)) ** 2
    threshold = 1e-12 * (4.0 / math.pi**2) * quad.b_max**4 * integrand_max
    if np.any(scaled < -threshold):
        worst = float(scaled.min())
        raise NegativeVarianceError(
            f"variance integral negative ({worst:.3e} vs clamp {threshold:.3e}, scaled units)")
    scaled = np.maximum(scaled, 0.0)
    return scaled / count * math.exp(2 * quad.peak)


def hankel_p(cf, filt: NonclassicalityFilter, alpha_abs: float, per_unit: int = NODES_PER_UNIT,
             complex_estimate: bool = False):
    """Filtered quasiprobability at ``|alpha|``.

    Uses the real part of the characteristic function unless
    ``complex_estimate`` is set, in which case the complex transform of the
    full estimate is returned (its imaginary part is pure sampling noise).
    """
    quad = _Quadrature(cf, filt, per_unit)
    value = quad.transform(quad.bessel(np.atleast_1d(alpha_abs)))[0]
    return complex(value) if complex_estimate else float(np.real(value))


def variance_p(cf, filt: NonclassicalityFilter, alpha_abs: float, p_value: float,
               per_unit: int = NODES_PER_UNIT, count: int | None = None) -> float:
    """Sampling variance of :func:`hankel_p` at ``|alpha|``.

    ``p_value`` must be the matching transform value. ``count`` defaults to
    the sample count behind ``cf``.
    """
    count = count or cf.count
    if not count:
        raise ValueError("sample count unknown; pass count=")
    quad = _Quadrature(cf, filt, per_unit)
    bessel = quad.bessel(np.atleast_1d(alpha_abs))
    moment, imax = quad.second_moment(bessel)
    return float(_variance(quad, np.array([p_value]), moment, imax, count)[0])


def profile(cf, filt: NonclassicalityFilter, alpha_grid=None, per_unit: int = NODES_PER_UNIT,
            count: int | None = None) -> QuasiprobProfile:
    """Quasiprobability and its standard deviation on a grid of ``|alpha|``.

    Without a sample count (e.g. an exact characteristic function) the
    standard deviations are reported as zero.
    """
    alphas = DEFAULT_ALPHA_GRID if alpha_grid is None else np.asarray(alpha_grid, dtype=float)
    alphas = np.atleast_1d(alphas)
    count = count or getattr(cf, "count", None)
    quad = _Quadrature(cf, filt, per_unit)
    bessel = quad.bessel(alphas)
    values = np.real(quad.transform(bessel))
    if count:
        moment, imax = quad.second_moment(bessel)
        sigmas = np.sqrt(_variance(quad, values, moment, imax, count))
    else:
        sigmas = np.zeros_like(values)
    return QuasiprobProfile(
        alpha_radii=alphas.copy(), values=values, sigmas=sigmas, filter=filt.describe(),
        source_count=count, settings={"nodes_per_unit": per_unit, "b_max": quad.b_max,
                                      "nodes": int(quad.b.size)})
