"""Pure numpy versions of the compiled kernels in ``_kernels.pyx``.

Both backends evaluate the same recurrences; they differ only in summation
order, so results agree to a few ulp rather than bit for bit.
"""
import numpy as np

_RESEED = 64


def quadrature_cf(x, dk, m):
    """Return ``mean_j exp(i k dk x_j)`` for ``k = 0 .. m-1``."""
    x = np.ascontiguousarray(x, dtype=float)
    out = np.empty(m, dtype=complex)
    step = np.exp(1j * dk * x)
    for k0 in range(0, m, _RESEED):
        z = np.exp(1j * (k0 * dk) * x)
        for k in range(k0, min(k0 + _RESEED, m)):
            out[k] = z.sum() / x.size
            z = z * step
    return out


def autocorr_box_integrals(s, lx, ly, gx, gw):
    """Tensor Gauss-Legendre integral of the shifted autocorrelation integrand.

    For each lag ``s`` integrates ``exp(-(2 r^4 + 4 r^2 h^2 + 8 h^2 ux^2))``
    with ``h = s/2`` over the box ``[-lx, lx] x [-ly, ly]``.
    """
    s = np.asarray(s, dtype=float)
    out = np.empty(s.size)
    ww = np.outer(gw, gw)
    for i in range(s.size):
        h2 = 0.25 * s[i] ** 2
        ux = (lx[i] * gx)[:, None]
        uy = (ly[i] * gx)[None, :]
        r2 = ux * ux + uy * uy
        f = np.exp(-(2.0 * r2 * r2 + 4.0 * r2 * h2 + 8.0 * h2 * ux * ux))
        out[i] = lx[i] * ly[i] * np.sum(ww * f)
    return out
