"""Analytic model of single-photon-added thermal states (SPATS).

Quadratures follow the vacuum-variance-one convention: the vacuum quadrature
characteristic function is ``exp(-k**2 / 2)``, which is the convention implied
by the ``exp(b**2 / 2)`` factor of the sampling formula in
:mod:`ncquasi.charfunc`.

Losses enter through the efficiency ``eta`` as ``Phi(b; eta) = Phi(sqrt(eta) b)``,
so every function here describes the state as seen by the detector.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy import stats

#: Fixed chunk size of the seeded sampler. Chunk ``i`` draws from
#: ``PCG64(seed + i)``, so threaded and serial runs produce identical data.
CHUNK_SIZE = 65536

QUADRATURE_CONVENTION = "vacuum_variance_1"


@dataclass(frozen=True)
class SpatsParams:
    """Mean thermal photon number and detection efficiency of a SPATS."""

    nbar: float
    eta: float = 1.0

    def __post_init__(self):
        if not (math.isfinite(self.nbar) and self.nbar >= 0):
            raise ValueError(f"nbar must be >= 0, got {self.nbar}")
        if not (math.isfinite(self.eta) and 0 < self.eta <= 1):
            raise ValueError(f"eta must lie in (0, 1], got {self.eta}")

    @property
    def gauss_scale(self) -> float:
        """``a = nbar*eta + 1/2``; the quadrature CF is ``exp(-a k^2)(1 - c k^2)``."""
        return self.nbar * self.eta + 0.5

    @property
    def photon_weight(self) -> float:
        """``c = (1 + nbar) * eta``."""
        return (1.0 + self.nbar) * self.eta


@dataclass(frozen=True)
class QuadratureDataset:
    """Homodyne quadrature samples together with the settings that produced them."""

    samples: np.ndarray
    params: SpatsParams | None = None
    seed: int | None = None
    convention: str = field(default=QUADRATURE_CONVENTION)

    def __post_init__(self):
        samples = np.ascontiguousarray(self.samples, dtype=float)
        if samples.ndim != 1 or samples.size < 1:
            raise ValueError("a quadrature dataset needs at least one sample")
        samples.setflags(write=False)
        object.__setattr__(self, "samples", samples)

    @property
    def count(self) -> int:
        return int(self.samples.size)


def cf_theoretical(params: SpatsParams, b):
    """Characteristic function of the lossy SPATS at radius ``b``.

    Returns ``[1 - (1 + nbar) eta b^2] exp(-nbar eta b^2)``.
    """
    b2 = np.square(b)
    return (1.0 - params.photon_weight * b2) * np.exp(-params.nbar * params.eta * b2)


def _p_lossless(nbar, r):
    r2 = np.square(r)
    return ((1.0 + nbar) * r2 - nbar) * np.exp(-r2 / nbar) / (math.pi * nbar**3)


def p_theoretical(params: SpatsParams, alpha_abs):
    """Regular Glauber-Sudarshan P function of the detected state.

    The lossless P function is rescaled as ``P(alpha; eta) = P(alpha/sqrt(eta)) / eta``.

    Raises
    ------
    ValueError
        For ``nbar == 0``; the photon-number state has no regular P function.
    """
    if params.nbar == 0:
        raise ValueError("singular P function: nbar = 0 (single-photon limit)")
    eta = params.eta
    return _p_lossless(params.nbar, np.asarray(alpha_abs) / math.sqrt(eta)) / eta


def wigner_origin(params: SpatsParams) -> float:
    """Wigner function at the phase-space origin.

    Closed form of ``(2/pi) * int_0^inf b Phi(b) exp(-b^2/2) db``; its sign is
    that of ``1/2 - eta`` for every ``nbar``.
    """
    a = params.gauss_scale
    return (0.5 - params.eta) / (math.pi * a * a)


def quadrature_cf_theoretical(params: SpatsParams, k):
    """Characteristic function ``E[exp(i k x)]`` of a single quadrature."""
    k2 = np.square(k)
    return (1.0 - params.photon_weight * k2) * np.exp(-params.gauss_scale * k2)


def quadrature_pdf(params: SpatsParams, x):
    """Probability density of the phase-averaged quadrature.

    ``p(x) = exp(-x^2/(4a)) / (2 sqrt(pi a)) * [1 - c/(2a) + c x^2 / (4 a^2)]``.
    """
    a, c = params.gauss_scale, params.photon_weight
    x2 = np.square(x)
    return (np.exp(-x2 / (4 * a)) / (2 * math.sqrt(math.pi * a))
            * (1 - c / (2 * a) + c * x2 / (4 * a * a)))


def _mixture(params):
    a, c = params.gauss_scale, params.photon_weight
    return math.sqrt(2 * a), c / (2 * a)


def quadrature_cdf(params: SpatsParams, x):
    """Cumulative distribution matching :func:`quadrature_pdf`."""
    sigma, q = _mixture(params)
    t = np.asarray(x, dtype=float) / sigma
    gauss = stats.norm.cdf(t)
    chi3 = 0.5 + 0.5 * np.sign(t) * stats.chi.cdf(np.abs(t), 3)
    return (1 - q) * gauss + q * chi3


def _sample_chunk(params, n, seed):
    sigma, q = _mixture(params)
    rng = np.random.Generator(np.random.PCG64(seed))
    photon = rng.random(n) < q
    gauss = rng.standard_normal(n)
    radial = rng.chisquare(3, n)
    sign = np.where(rng.random(n) < 0.5, -1.0, 1.0)
    return sigma * np.where(photon, sign * np.sqrt(radial), gauss)


def sample_quadratures(params: SpatsParams, n: int, seed: int, threads: int = 1) -> QuadratureDataset:
    """Draw ``n`` independent quadratures from :func:`quadrature_pdf`.

    The density is a two-component mixture on a common Gaussian scale
    ``sqrt(2a)``: a plain Gaussian with weight ``1 - c/(2a)`` and an
    ``x^2``-weighted Gaussian (signed chi with 3 degrees of freedom) with
    weight ``c/(2a)``. Sampling is exact and rejection-free.

    Random numbers come from numpy's PCG64 bit generator. Samples are drawn in
    chunks of :data:`CHUNK_SIZE`; chunk ``i`` is seeded with ``seed + i``.
    """
    n = int(n)
    if n < 1:
        raise ValueError(f"sample count must be >= 1, got {n}")
    sizes = [min(CHUNK_SIZE, n - start) for start in range(0, n, CHUNK_SIZE)]
    jobs = [(params, m, int(seed) + i) for i, m in enumerate(sizes)]
    if threads > 1 and len(jobs) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(lambda job: _sample_chunk(*job), jobs))
    else:
        parts = [_sample_chunk(*job) for job in jobs]
    return QuadratureDataset(np.concatenate(parts), params=params, seed=int(seed))
