"""Empirical characteristic function of phase-averaged homodyne data.

For quadratures ``x_j`` (vacuum variance one) the radial characteristic
function is estimated as

    Phi(b) = exp(b^2/2) / N * sum_j exp(i b x_j)

with variance ``(exp(b^2) - |Phi(b)|^2) / N``. That variance describes the
complex estimator as a whole (real plus imaginary fluctuations).

Internally the bounded quantity ``chi(b) = exp(-b^2/2) Phi(b)``, the quadrature
characteristic function, is kept alongside the values so that downstream
transforms can combine the ``exp(b^2/2)`` growth with the filter decay in log
space instead of overflowing.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np
from scipy.interpolate import CubicSpline

from . import _backend
from .spats import QuadratureDataset, SpatsParams, quadrature_cf_theoretical

DEFAULT_STEP = 0.02


class CfRangeError(ValueError):
    """Requested radius lies outside the tabulated characteristic function."""


def default_grid(b_max: float, step: float = DEFAULT_STEP) -> np.ndarray:
    """Uniform radial grid ``0, step, ...`` reaching at least ``b_max``."""
    m = int(np.ceil(b_max / step - 1e-9)) + 1
    return np.arange(m) * step


@dataclass(frozen=True, eq=False)
class RadialCfEstimate:
    radii: np.ndarray
    chi: np.ndarray
    source_count: int

    @cached_property
    def values(self) -> np.ndarray:
        with np.errstate(over="ignore", invalid="ignore"):
            return np.exp(0.5 * self.radii**2) * self.chi

    @cached_property
    def variances(self) -> np.ndarray:
        with np.errstate(over="ignore", invalid="ignore"):
            return np.exp(self.radii**2) * (1.0 - np.abs(self.chi) ** 2) / self.source_count

    @property
    def count(self) -> int:
        return self.source_count

    @property
    def max_radius(self) -> float:
        return float(self.radii[-1])

    @cached_property
    def _value_splines(self):
        v = self.values
        return CubicSpline(self.radii, v.real), CubicSpline(self.radii, v.imag)

    @cached_property
    def _chi_splines(self):
        return CubicSpline(self.radii, self.chi.real), CubicSpline(self.radii, self.chi.imag)

    def _check_range(self, b):
        if np.any(np.abs(b) > self.max_radius * (1 + 1e-12)):
            raise CfRangeError(
                f"|b| up to {np.max(np.abs(b)):.6g} exceeds the estimate grid "
                f"(max radius {self.max_radius:.6g})")

    def cf_at(self, b):
        """Interpolated estimate at ``b``, conjugated for negative ``b``."""
        b = np.asarray(b, dtype=float)
        self._check_range(b)
        re, im = self._value_splines
        a = np.abs(b)
        out = re(a) + 1j * im(a)
        # stored values at the nodes themselves, not the spline's round-off
        i = np.clip(np.searchsorted(self.radii, a), 0, self.radii.size - 1)
        on_node = self.radii[i] == a
        out = np.where(on_node, self.values[i], out)
        return np.where(b < 0, np.conj(out), out)

    def quadrature_chi(self, k):
        """Interpolated ``exp(-k^2/2) Phi(k)`` with Hermitian extension to ``k < 0``."""
        k = np.asarray(k, dtype=float)
        self._check_range(k)
        re, im = self._chi_splines
        a = np.abs(k)
        return re(a) + 1j * np.sign(k + (k == 0)) * im(a)

    def imag_diagnostic(self) -> float:
        """Largest ``|Im Phi| / sigma`` over the grid; O(1) for phase-averaged data."""
        chi = self.chi[1:]
        spread = np.sqrt((1.0 - np.abs(chi) ** 2) / self.source_count)
        ok = spread > 0
        if not np.any(ok):
            return 0.0
        return float(np.max(np.abs(chi.imag[ok]) / spread[ok]))

def cf_at(estimate: RadialCfEstimate, b):
    return estimate.cf_at(b)


def estimate_cf(data: QuadratureDataset, radii) -> RadialCfEstimate:
    """Sample the characteristic function of ``data`` on the grid ``radii``.

    ``radii`` must start at 0 and increase strictly. Uniform grids use the
    compiled phase-recurrence kernel; other grids fall back to direct sums.
    """
    radii = np.asarray(radii, dtype=float)
    if radii.ndim != 1 or radii.size == 0 or radii[0] != 0:
        raise ValueError("radial grid must be one-dimensional and start at 0")
    if np.any(np.diff(radii) <= 0):
        raise ValueError("radial grid must be strictly increasing")
    x = data.samples
    if x.size == 0:
        raise ValueError("empty quadrature dataset")
    m = radii.size
    if m == 1:
        chi = np.ones(1, dtype=complex)
    else:
        dk = radii[1]
        if np.allclose(radii, np.arange(m) * dk, rtol=0, atol=1e-12 * radii[-1]):
            chi = _backend.quadrature_cf(x, float(dk), m)
        else:
            chi = np.array([np.exp(1j * b * x).mean() for b in radii])
    chi[0] = 1.0
    return RadialCfEstimate(radii=radii, chi=chi, source_count=x.size)


class AnalyticCf:
    """Exact characteristic function wrapped to look like an estimate.

    ``count`` is optional; when set, quasiprobability variances are the
    expected ones for a dataset of that size.
    """

    max_radius = np.inf

    def __init__(self, phi, count: int | None = None, label: str = "analytic", chi=None):
        self._phi = phi
        self._chi = chi
        self.count = count
        self.label = label

    @classmethod
    def spats(cls, params: SpatsParams, count: int | None = None):
        return cls(lambda b: (1 - params.photon_weight * b * b) * np.exp(-params.nbar * params.eta * b * b),
                   count=count, label=f"spats(nbar={params.nbar}, eta={params.eta})",
                   chi=lambda k: quadrature_cf_theoretical(params, k))

    @classmethod
    def thermal(cls, nbar: float, count: int | None = None):
        """Thermal state, ``Phi(b) = exp(-nbar b^2)``; a classical reference."""
        return cls(lambda b: np.exp(-nbar * b * b), count=count, label=f"thermal(nbar={nbar})",
                   chi=lambda k: np.exp(-(nbar + 0.5) * k * k))

    def cf_at(self, b):
        return self._phi(np.abs(np.asarray(b, dtype=float)))

    def quadrature_chi(self, k):
        k = np.asarray(k, dtype=float)
        if self._chi is not None:
            return self._chi(k)
        return np.exp(-0.5 * k * k) * self._phi(np.abs(k))
