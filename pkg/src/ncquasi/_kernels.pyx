# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled inner loops. Signatures mirror :mod:`ncquasi._fallback`."""
import numpy as np

from libc.math cimport cos, exp, sin

cdef enum:
    LANES = 4
cdef Py_ssize_t RESEED = 64


def quadrature_cf(const double[::1] x, double dk, Py_ssize_t m):
    # Samples are processed LANES at a time so the rotation recurrences form
    # independent dependency chains; each chain is reseeded from sin/cos
    # every RESEED steps to bound the accumulated phase error.
    cdef Py_ssize_t n = x.shape[0]
    cdef Py_ssize_t j, k, k0, k1, l, nl
    cdef double sr[LANES]
    cdef double si[LANES]
    cdef double zr[LANES]
    cdef double zi[LANES]
    cdef double xs[LANES]
    cdef double t, ar, ai
    re_arr = np.zeros(m)
    im_arr = np.zeros(m)
    cdef double[::1] re = re_arr
    cdef double[::1] im = im_arr
    with nogil:
        j = 0
        while j < n:
            nl = LANES if n - j >= LANES else n - j
            for l in range(nl):
                xs[l] = x[j + l]
                sr[l] = cos(dk * xs[l])
                si[l] = sin(dk * xs[l])
            for l in range(nl, LANES):
                xs[l] = 0.0
                sr[l] = 1.0
                si[l] = 0.0
            k0 = 0
            while k0 < m:
                k1 = k0 + RESEED if k0 + RESEED < m else m
                for l in range(nl):
                    zr[l] = cos(k0 * dk * xs[l])
                    zi[l] = sin(k0 * dk * xs[l])
                for l in range(nl, LANES):
                    zr[l] = 0.0
                    zi[l] = 0.0
                for k in range(k0, k1):
                    ar = (zr[0] + zr[1]) + (zr[2] + zr[3])
                    ai = (zi[0] + zi[1]) + (zi[2] + zi[3])
                    re[k] += ar
                    im[k] += ai
                    for l in range(LANES):
                        t = zr[l] * sr[l] - zi[l] * si[l]
                        zi[l] = zr[l] * si[l] + zi[l] * sr[l]
                        zr[l] = t
                k0 = k1
            j += LANES
        for k in range(m):
            re[k] /= n
            im[k] /= n
    return re_arr + 1j * im_arr


def autocorr_box_integrals(const double[::1] s, const double[::1] lx,
                           const double[::1] ly, const double[::1] gx,
                           const double[::1] gw):
    # The integrand is even in both coordinates and Gauss-Legendre nodes are
    # symmetric about zero, so only the nodes with gx >= 0 are visited and
    # off-axis ones are weighted twice.
    cdef Py_ssize_t ns = s.shape[0]
    cdef Py_ssize_t q = gx.shape[0]
    cdef Py_ssize_t half = (q + 1) // 2
    cdef Py_ssize_t i, a, b
    cdef double h2, ux, ux2, uy, r2, acc, row, wa, wb
    out_arr = np.empty(ns)
    cdef double[::1] out = out_arr
    with nogil:
        for i in range(ns):
            h2 = 0.25 * s[i] * s[i]
            acc = 0.0
            for a in range(q - half, q):
                ux = lx[i] * gx[a]
                ux2 = ux * ux
                wa = gw[a] if 2 * a == q - 1 else 2.0 * gw[a]
                row = 0.0
                for b in range(q - half, q):
                    uy = ly[i] * gx[b]
                    r2 = ux2 + uy * uy
                    wb = gw[b] if 2 * b == q - 1 else 2.0 * gw[b]
                    row += wb * exp(-(2.0 * r2 * r2 + 4.0 * r2 * h2 + 8.0 * h2 * ux2))
                acc += wa * row
            out[i] = lx[i] * ly[i] * acc
    return out_arr
