# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled kernels; signatures mirror ``_fallback``."""

import numpy as np

from libc.math cimport cos, sin


def kraus_branches(const double complex[:, ::1] F, const double[:, ::1] coeff, bint on_mode_a):
    cdef Py_ssize_t n = F.shape[0] - 1
    cdef Py_ssize_t r = F.shape[1]
    cdef Py_ssize_t j, k, c
    cdef double w
    out = np.zeros((n + 1, n + 1, r), dtype=np.complex128)
    cdef double complex[:, :, ::1] o = out
    for j in range(n + 1):
        if on_mode_a:
            for k in range(j, n + 1):
                w = coeff[k, j]
                if w != 0.0:
                    for c in range(r):
                        o[j, k - j, c] = w * F[k, c]
        else:
            for k in range(n - j + 1):
                w = coeff[n - k, j]
                if w != 0.0:
                    for c in range(r):
                        o[j, k, c] = w * F[k, c]
    return out


def sector_counts(const double complex[::1] amp, const long long[::1] col_sector,
                  const long long[::1] col_offset, const double complex[::1] bs_flat,
                  const long long[::1] bs_offset, double phi, Py_ssize_t n_max):
    P = np.zeros((n_max + 1, n_max + 1))
    D = np.zeros((n_max + 1, n_max + 1))
    cdef double[:, ::1] p = P
    cdef double[:, ::1] d = D
    xr_a = np.empty(n_max + 1)
    xi_a = np.empty(n_max + 1)
    cdef double[::1] xr = xr_a
    cdef double[::1] xi = xi_a
    cdef Py_ssize_t col, n, k, row, off, boff, base
    cdef double c, s, ar, ai, br, bi, yr, yi, dyr, dyi
    for col in range(col_sector.shape[0]):
        n = col_sector[col]
        off = col_offset[col]
        boff = bs_offset[n]
        for k in range(n + 1):
            c = cos(k * phi)
            s = sin(k * phi)
            ar = amp[off + k].real
            ai = amp[off + k].imag
            xr[k] = c * ar - s * ai
            xi[k] = c * ai + s * ar
        for row in range(n + 1):
            yr = yi = dyr = dyi = 0.0
            base = boff + row * (n + 1)
            for k in range(n + 1):
                br = bs_flat[base + k].real
                bi = bs_flat[base + k].imag
                ar = br * xr[k] - bi * xi[k]
                ai = br * xi[k] + bi * xr[k]
                yr += ar
                yi += ai
                # d/dphi multiplies x_k by i*k
                dyr -= k * ai
                dyi += k * ar
            p[row, n - row] += yr * yr + yi * yi
            d[row, n - row] += 2.0 * (yr * dyr + yi * dyi)
    return P, D
