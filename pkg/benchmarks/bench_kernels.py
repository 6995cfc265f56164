"""Time the compiled kernels against the numpy fallback.

Usage: python3 benchmarks/bench_kernels.py [--samples N] [--repeat R]
"""
import argparse
import timeit

import numpy as np
from numpy.polynomial.legendre import leggauss

from ncquasi import _fallback
from ncquasi.filters import _box_halfwidth

try:
    from ncquasi import _kernels
except ImportError:
    _kernels = None


def bench(label, fn_c, fn_py, repeat):
    t_py = min(timeit.repeat(fn_py, number=1, repeat=repeat))
    if _kernels is None:
        print(f"{label:<28} python {t_py:8.3f} s   (compiled extension not built)")
        return
    t_c = min(timeit.repeat(fn_c, number=1, repeat=repeat))
    diff = np.max(np.abs(fn_c() - fn_py()))
    print(f"{label:<28} cython {t_c:8.3f} s   python {t_py:8.3f} s   speedup {t_py / t_c:6.1f}x   max diff {diff:.2e}")


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--samples", type=int, default=100_000)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()

    x = np.random.default_rng(0).normal(0, 1.5, args.samples)
    m = 201  # b in [0, 4] at step 0.02
    bench(f"quadrature_cf N={args.samples}",
          lambda: _kernels.quadrature_cf(x, 0.02, m), lambda: _fallback.quadrature_cf(x, 0.02, m), args.repeat)

    s = np.linspace(0, 12, 129)
    h2 = 0.25 * s * s
    lx, ly = _box_halfwidth(12 * h2), _box_halfwidth(4 * h2)
    gx, gw = leggauss(200)
    bench("autocorr table, 129 lags",
          lambda: _kernels.autocorr_box_integrals(s, lx, ly, gx, gw),
          lambda: _fallback.autocorr_box_integrals(s, lx, ly, gx, gw), args.repeat)


if __name__ == "__main__":
    main()
