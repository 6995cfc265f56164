"""Regularizing filters for the characteristic function.

Two kinds are provided:

* the autocorrelation filter ``Omega_w(b) = Omega_1(b / w)``, where ``Omega_1``
  is the normalized 2D autocorrelation of ``omega(beta) = exp(-|beta|^4)``.
  It is positive everywhere, has a non-negative Fourier transform and decays
  like ``exp(-|beta|^4 / 8)``;
* the rectangular cutoff, 1 below ``|beta_c|`` and 0 above.

``Omega_1`` is tabulated in log space so its super-Gaussian tail stays
representable far beyond the double-precision underflow of the filter itself.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property, lru_cache
from typing import Callable

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy.interpolate import CubicSpline
from scipy.special import j0

from . import _backend

AUTOCORRELATION = "autocorrelation"
RECTANGULAR = "rectangular"
CUSTOM = "custom"

TRUNCATION_LEVEL = 1e-10
DECAY_LEVEL = 1e-6
FOURIER_TOLERANCE = 1e-8
# exp(-BOX_LEVEL) relative to the peak bounds the per-lag integration box
BOX_LEVEL = 40.0
SEARCH_LIMIT = 30.0


@dataclass(frozen=True, eq=False)
class AutocorrelationTable:
    """``log Omega_1`` on a uniform lag grid, with the normalization integral."""

    s: np.ndarray
    log_omega1: np.ndarray
    norm: float
    order: int

    @cached_property
    def _spline(self):
        return CubicSpline(self.s, self.log_omega1)

    @property
    def s_max(self) -> float:
        return float(self.s[-1])

    def log_value(self, s):
        s = np.abs(np.asarray(s, dtype=float))
        out = np.full(s.shape, -np.inf)
        inside = s <= self.s_max
        out[inside] = self._spline(s[inside])
        return out

    def omega1(self, s):
        return np.exp(self.log_value(s))


def _box_halfwidth(c):
    # positive root u of 2 u^4 + c u^2 = BOX_LEVEL
    return np.sqrt((-c + np.sqrt(c * c + 8 * BOX_LEVEL)) / 4)


def log_autocorrelation(s, order: int = 200) -> np.ndarray:
    """``log`` of the unnormalized autocorrelation ``int exp(-|b'|^4 - |b' + s|^4) d^2 b'``.

    With ``b' = u - s/2`` the integrand is ``exp(-2h^4) exp(-(2r^4 + 4r^2h^2 +
    8h^2 u_x^2))``, ``h = s/2``, which peaks at ``u = 0``. Each lag gets its own
    tensor Gauss-Legendre box covering the region within ``exp(-40)`` of that
    peak, so the tail keeps full relative accuracy.
    """
    s = np.atleast_1d(np.asarray(s, dtype=float))
    h2 = 0.25 * s * s
    lx = _box_halfwidth(12 * h2)
    ly = _box_halfwidth(4 * h2)
    gx, gw = leggauss(order)
    scaled = _backend.autocorr_box_integrals(s, lx, ly, gx, gw)
    return np.log(scaled) - 2 * h2 * h2


@lru_cache(maxsize=8)
def autocorrelation_table(order: int = 200, s_max: float = 12.0, nodes: int = 2049) -> AutocorrelationTable:
    s = np.linspace(0.0, s_max, nodes)
    log_i = log_autocorrelation(s, order)
    return AutocorrelationTable(s=s, log_omega1=log_i - log_i[0], norm=float(np.exp(log_i[0])), order=order)


@dataclass(frozen=True, eq=False)
class NonclassicalityFilter:
    """A radial filter ``Omega(b)``.

    ``width`` is the scale ``w`` for the autocorrelation kind and the cutoff
    ``|beta_c|`` for the rectangular kind. Beyond ``truncation_radius`` the
    filter is treated as exactly zero.
    """

    kind: str
    width: float
    truncation_radius: float
    table: AutocorrelationTable | None = field(default=None, repr=False)
    func: Callable | None = field(default=None, repr=False)
    label: str = ""

    @property
    def cutoff(self) -> float:
        if self.kind != RECTANGULAR:
            raise AttributeError("only rectangular filters have a cutoff")
        return self.width

    def raw_log_value(self, b):
        """``log Omega(b)`` without the truncation applied."""
        b = np.abs(np.asarray(b, dtype=float))
        if self.kind == AUTOCORRELATION:
            return self.table.log_value(b / self.width)
        if self.kind == RECTANGULAR:
            return np.where(b < self.width, 0.0, -np.inf)
        with np.errstate(divide="ignore"):
            return np.log(np.asarray(self.func(b), dtype=float))

    def log_value(self, b):
        b = np.abs(np.asarray(b, dtype=float))
        out = self.raw_log_value(b)
        return np.where(b <= self.truncation_radius, out, -np.inf)

    def value(self, b):
        return np.exp(self.log_value(b))

    def describe(self) -> dict:
        d = {"kind": self.kind, "truncation_radius": self.truncation_radius}
        if self.kind == RECTANGULAR:
            d["cutoff"] = self.width
        else:
            d["width"] = self.width
        if self.table is not None:
            d["table"] = {"order": self.table.order, "s_max": self.table.s_max, "nodes": int(self.table.s.size)}
        if self.label:
            d["label"] = self.label
        return d


def _truncation(b, log_omega):
    """Smallest grid radius past which the filter, and its product with the
    ``exp(b^2/2)`` noise growth, stay negligible."""
    gain = log_omega + 0.5 * b * b
    log_peak = max(0.0, float(np.max(gain)))
    ok = ((log_omega < math.log(TRUNCATION_LEVEL))
          & (gain < math.log(TRUNCATION_LEVEL) + log_peak)
          & (gain < math.log(DECAY_LEVEL)))
    bad = np.flatnonzero(~ok)
    if bad.size == 0:
        return float(b[0])
    if bad[-1] == b.size - 1:
        return math.inf
    return float(b[bad[-1] + 1])


def build_autocorrelation_filter(width: float, table: AutocorrelationTable | None = None) -> NonclassicalityFilter:
    """Autocorrelation nonclassicality filter of width ``w``."""
    if not (width > 0 and math.isfinite(width)):
        raise ValueError(f"filter width must be > 0, got {width}")
    table = table or autocorrelation_table()
    b = table.s * width
    r = _truncation(b, table.log_omega1)
    if not math.isfinite(r):
        raise ValueError(f"width {width} too large for the tabulated filter (s_max={table.s_max})")
    return NonclassicalityFilter(AUTOCORRELATION, float(width), r, table=table)


def build_rectangular_filter(cutoff: float) -> NonclassicalityFilter:
    if not (cutoff > 0 and math.isfinite(cutoff)):
        raise ValueError(f"cutoff must be > 0, got {cutoff}")
    return NonclassicalityFilter(RECTANGULAR, float(cutoff), float(cutoff))


def custom_filter(func: Callable, label: str = "custom", width: float = 1.0) -> NonclassicalityFilter:
    """Wrap an arbitrary radial function, e.g. to exercise the axiom checker."""
    b = np.linspace(0.0, SEARCH_LIMIT, 3001)
    with np.errstate(divide="ignore"):
        log_omega = np.log(np.asarray(func(b), dtype=float))
    r = _truncation(b, log_omega)
    return NonclassicalityFilter(CUSTOM, float(width), r, func=func, label=label)


def filter_value(filt: NonclassicalityFilter, b):
    return filt.value(b)


def _log_value_at_width(filt, width, b):
    """Untruncated ``log Omega`` of the same filter family at scale ``width``."""
    b = np.abs(np.asarray(b, dtype=float))
    if filt.kind == AUTOCORRELATION:
        return filt.table.log_value(b / width)
    if filt.kind == RECTANGULAR:
        return np.where(b < width, 0.0, -np.inf)
    with np.errstate(divide="ignore"):
        return np.log(np.asarray(filt.func(b * filt.width / width), dtype=float))


def gauss_legendre_panels(b_max: float, per_unit: int = 32, b_min: float = 0.0):
    """Composite Gauss-Legendre rule with ``per_unit`` nodes per unit length."""
    length = b_max - b_min
    if length <= 0:
        return np.empty(0), np.empty(0)
    panels = max(1, int(math.ceil(length - 1e-12)))
    x, w = _leggauss(per_unit)
    h = length / panels
    starts = b_min + h * np.arange(panels)
    nodes = (starts[:, None] + 0.5 * h * (x + 1)[None, :]).ravel()
    weights = np.tile(0.5 * h * w, panels)
    return nodes, weights


@lru_cache(maxsize=16)
def _leggauss(n):
    return leggauss(n)


def radial_fourier(filt: NonclassicalityFilter, s, per_unit: int = 32):
    """``(2/pi) int_0^R b J0(2 b s) Omega(b) db`` over the filter support."""
    r = filt.truncation_radius if math.isfinite(filt.truncation_radius) else SEARCH_LIMIT
    b, w = gauss_legendre_panels(r, per_unit)
    weight = w * b * np.exp(filt.raw_log_value(b))
    return (2 / math.pi) * j0(2 * np.outer(np.atleast_1d(s), b)) @ weight


@dataclass(frozen=True)
class AxiomResult:
    name: str
    passed: bool
    margin: float
    detail: str


@dataclass(frozen=True)
class AxiomReport:
    filter: dict
    results: tuple

    @property
    def all_passed(self) -> bool:
        return all(r.passed for r in self.results)

    def __getitem__(self, key):
        """Look up a result by position or by axiom name."""
        if isinstance(key, str):
            for r in self.results:
                if r.name == key:
                    return r
            raise KeyError(key)
        return self.results[key]

    def as_dict(self) -> dict:
        return {"filter": self.filter, "all_passed": self.all_passed,
                "axioms": [{"name": r.name, "passed": r.passed,
                            "margin": r.margin if math.isfinite(r.margin) else None,
                            "detail": r.detail} for r in self.results]}


def verify_filter_axioms(filt: NonclassicalityFilter, b_probe: float = 1.0) -> AxiomReport:
    """Numerically check the four nonclassicality-filter conditions.

    1. ``Omega(b) exp(b^2/2)`` eventually decreases and drops below 1e-6
       within the truncation radius.
    2. The radial Fourier transform is ``>= -1e-8`` on ``s in [0, 10]``.
    3. ``Omega_w(b_probe)`` rises towards 1 for ``w`` in (1, 10, 100),
       ending within 1e-3 of 1.
    4. ``Omega > 0`` everywhere it is represented.

    Margins are positive when an axiom holds. The full-support margin is the
    smallest ``log Omega`` instead, finite exactly when the axiom holds.
    """
    trunc = filt.truncation_radius
    reach = trunc if math.isfinite(trunc) else SEARCH_LIMIT
    results = []

    b = np.linspace(0.0, reach, 4001)
    gain = np.maximum(filt.raw_log_value(b) + 0.5 * b * b, -1e300)
    if filt.kind == RECTANGULAR:
        gain[-1] = -1e300  # value at the cutoff itself is exactly zero
    peak = int(np.argmax(gain))
    monotone = bool(np.all(np.diff(gain[peak:]) <= 1e-9))
    margin = math.log(DECAY_LEVEL) - max(float(gain[-1]), -700.0)
    ok = monotone and margin > 0 and math.isfinite(trunc)
    results.append(AxiomResult(
        "decay", ok, margin,
        f"log(Omega e^(b^2/2)) at b={reach:.4g} is {gain[-1]:.4g}; monotone tail: {monotone}"))

    s = np.linspace(0.0, 10.0, 201)
    ft = radial_fourier(filt, s)
    worst = float(ft.min())
    results.append(AxiomResult(
        "fourier_positivity", worst >= -FOURIER_TOLERANCE, worst + FOURIER_TOLERANCE,
        f"min transform {worst:.3e} at s={s[np.argmin(ft)]:.3g}"))

    vals = np.exp([float(_log_value_at_width(filt, w, b_probe)) for w in (1.0, 10.0, 100.0)])
    gap = 1.0 - vals[-1]
    ok = bool(np.all(np.diff(vals) >= -1e-12) and gap < 1e-3)
    results.append(AxiomResult("unit_limit", ok, float(1e-3 - gap),
                               f"Omega(b={b_probe}) at widths 1, 10, 100: {vals.round(8).tolist()}"))

    if filt.kind == AUTOCORRELATION:
        logs = filt.table.log_omega1
        ok = bool(np.all(np.isfinite(logs)))
        worst = float(logs[filt.table.s * filt.width <= trunc].min())
        detail = f"log Omega_1 finite on all {logs.size} table nodes; min log inside truncation {worst:.4g}"
    else:
        probe = np.linspace(0.0, min(2 * reach, SEARCH_LIMIT), 4001)
        logs = filt.raw_log_value(probe)
        ok = bool(np.all(np.isfinite(logs)))
        worst = float(logs.min())
        detail = f"min log Omega on [0, {probe[-1]:.4g}] is {worst:.4g}"
    # margin: smallest filter value, in log space so deep tails do not underflow
    minimum = worst if math.isfinite(worst) else -math.inf
    results.append(AxiomResult("full_support", ok, minimum, detail))
    return AxiomReport(filt.describe(), tuple(results))
