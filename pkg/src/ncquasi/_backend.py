"""Kernel backend selection.

The compiled extension is used when it imports; set ``NCQUASI_PURE_PYTHON=1``
to force the numpy fallback.
"""
import os

from . import _fallback

BACKEND = "python"
quadrature_cf = _fallback.quadrature_cf
autocorr_box_integrals = _fallback.autocorr_box_integrals

if not os.environ.get("NCQUASI_PURE_PYTHON"):
    try:
        from ._kernels import autocorr_box_integrals, quadrature_cf  # noqa: F811
    except ImportError:
        pass
    else:
        BACKEND = "cython"

__all__ = ["BACKEND", "quadrature_cf", "autocorr_box_integrals"]
