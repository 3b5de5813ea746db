# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled batch kernels.

Mirrors `_py` function by function: same formulas, same branch structure,
same NaN-on-underflow convention, ties resolved to the lowest index. The
inner loops run without the GIL.
"""

import numpy as np

from libc.math cimport erfc, exp, fabs, NAN

cdef double _INV_SQRT2 = 0.7071067811865476
cdef double _INV_SQRT_2PI = 0.3989422804014327
cdef double _MASS_FLOOR = 1e-300


cdef inline double _ndtr(double x) nogil:
    return 0.5 * erfc(-x * _INV_SQRT2)


cdef inline double _phi_mass(double alpha, double beta) nogil:
    # reflect upper-tail intervals so the CDF difference keeps accuracy
    if alpha > 0.0:
        return _ndtr(-alpha) - _ndtr(-beta)
    return _ndtr(beta) - _ndtr(alpha)


cdef inline double _clamp(double x, double lo, double hi) nogil:
    if x < lo:
        return lo
    if x > hi:
        return hi
    return x


def mmse_1d_batch(lo, hi, z, double sigma):
    """Posterior-mean positions for a batch of 1-D observations."""
    lo_a = np.ascontiguousarray(lo, dtype=np.float64)
    hi_a = np.ascontiguousarray(hi, dtype=np.float64)
    z_a = np.ascontiguousarray(np.atleast_1d(z), dtype=np.float64)
    out = np.empty(z_a.shape[0], dtype=np.float64)
    cdef double[::1] lov = lo_a
    cdef double[::1] hiv = hi_a
    cdef double[::1] zv = z_a
    cdef double[::1] ov = out
    cdef Py_ssize_t n = zv.shape[0]
    cdef Py_ssize_t m = lov.shape[0]
    cdef Py_ssize_t i, k
    cdef double zi, a, b, c, mass, mom
    with nogil:
        for i in range(n):
            zi = zv[i]
            mass = 0.0
            mom = 0.0
            for k in range(m):
                a = (lov[k] - zi) / sigma
                b = (hiv[k] - zi) / sigma
                c = _phi_mass(a, b)
                mass += c
                mom += zi * c + sigma * _INV_SQRT_2PI * (
                    exp(-0.5 * a * a) - exp(-0.5 * b * b)
                )
            if mass > _MASS_FLOOR:
                ov[i] = mom / mass
            else:
                ov[i] = NAN
    return out


def map_1d_batch(lo, hi, z):
    """Nearest support point per observation; ties go to the lower index."""
    lo_a = np.ascontiguousarray(lo, dtype=np.float64)
    hi_a = np.ascontiguousarray(hi, dtype=np.float64)
    z_a = np.ascontiguousarray(np.atleast_1d(z), dtype=np.float64)
    out = np.empty(z_a.shape[0], dtype=np.float64)
    cdef double[::1] lov = lo_a
    cdef double[::1] hiv = hi_a
    cdef double[::1] zv = z_a
    cdef double[::1] ov = out
    cdef Py_ssize_t n = zv.shape[0]
    cdef Py_ssize_t m = lov.shape[0]
    cdef Py_ssize_t i, k
    cdef double zi, cand, d, best, best_d
    with nogil:
        for i in range(n):
            zi = zv[i]
            best = 0.0
            best_d = -1.0
            for k in range(m):
                cand = _clamp(zi, lov[k], hiv[k])
                d = fabs(cand - zi)
                if best_d < 0.0 or d < best_d:
                    best_d = d
                    best = cand
            ov[i] = best
    return out


def mmse_2d_batch(xlo, xhi, ylo, yhi, zx, zy, double sigma_x, double sigma_y):
    """Posterior-mean positions over a rectangle union."""
    xlo_a = np.ascontiguousarray(xlo, dtype=np.float64)
    xhi_a = np.ascontiguousarray(xhi, dtype=np.float64)
    ylo_a = np.ascontiguousarray(ylo, dtype=np.float64)
    yhi_a = np.ascontiguousarray(yhi, dtype=np.float64)
    zx_a = np.ascontiguousarray(np.atleast_1d(zx), dtype=np.float64)
    zy_a = np.ascontiguousarray(np.atleast_1d(zy), dtype=np.float64)
    xhat = np.empty(zx_a.shape[0], dtype=np.float64)
    yhat = np.empty(zx_a.shape[0], dtype=np.float64)
    cdef double[::1] xlov = xlo_a
    cdef double[::1] xhiv = xhi_a
    cdef double[::1] ylov = ylo_a
    cdef double[::1] yhiv = yhi_a
    cdef double[::1] zxv = zx_a
    cdef double[::1] zyv = zy_a
    cdef double[::1] oxv = xhat
    cdef double[::1] oyv = yhat
    cdef Py_ssize_t n = zxv.shape[0]
    cdef Py_ssize_t m = xlov.shape[0]
    cdef Py_ssize_t i, k
    cdef double px, py, ax, bx, ay, by, cx, cy, mx, my, mass, xm, ym
    with nogil:
        for i in range(n):
            px = zxv[i]
            py = zyv[i]
            mass = 0.0
            xm = 0.0
            ym = 0.0
            for k in range(m):
                ax = (xlov[k] - px) / sigma_x
                bx = (xhiv[k] - px) / sigma_x
                ay = (ylov[k] - py) / sigma_y
                by = (yhiv[k] - py) / sigma_y
                cx = _phi_mass(ax, bx)
                cy = _phi_mass(ay, by)
                mx = px * cx + sigma_x * _INV_SQRT_2PI * (
                    exp(-0.5 * ax * ax) - exp(-0.5 * bx * bx)
                )
                my = py * cy + sigma_y * _INV_SQRT_2PI * (
                    exp(-0.5 * ay * ay) - exp(-0.5 * by * by)
                )
                mass += cx * cy
                xm += mx * cy
                ym += cx * my
            if mass > _MASS_FLOOR:
                oxv[i] = xm / mass
                oyv[i] = ym / mass
            else:
                oxv[i] = NAN
                oyv[i] = NAN
    return xhat, yhat


def map_2d_gaussian_batch(xlo, xhi, ylo, yhi, zx, zy,
                          double sigma_x, double sigma_y):
    """Support projection under per-axis noise weighting."""
    xlo_a = np.ascontiguousarray(xlo, dtype=np.float64)
    xhi_a = np.ascontiguousarray(xhi, dtype=np.float64)
    ylo_a = np.ascontiguousarray(ylo, dtype=np.float64)
    yhi_a = np.ascontiguousarray(yhi, dtype=np.float64)
    zx_a = np.ascontiguousarray(np.atleast_1d(zx), dtype=np.float64)
    zy_a = np.ascontiguousarray(np.atleast_1d(zy), dtype=np.float64)
    ox = np.empty(zx_a.shape[0], dtype=np.float64)
    oy = np.empty(zx_a.shape[0], dtype=np.float64)
    cdef double[::1] xlov = xlo_a
    cdef double[::1] xhiv = xhi_a
    cdef double[::1] ylov = ylo_a
    cdef double[::1] yhiv = yhi_a
    cdef double[::1] zxv = zx_a
    cdef double[::1] zyv = zy_a
    cdef double[::1] oxv = ox
    cdef double[::1] oyv = oy
    cdef Py_ssize_t n = zxv.shape[0]
    cdef Py_ssize_t m = xlov.shape[0]
    cdef Py_ssize_t i, k
    cdef double px, py, cx, cy, dx, dy, score, best, bx, by
    with nogil:
        for i in range(n):
            px = zxv[i]
            py = zyv[i]
            best = -1.0
            bx = 0.0
            by = 0.0
            for k in range(m):
                cx = _clamp(px, xlov[k], xhiv[k])
                cy = _clamp(py, ylov[k], yhiv[k])
                dx = (px - cx) / sigma_x
                dy = (py - cy) / sigma_y
                score = dx * dx + dy * dy
                if best < 0.0 or score < best:
                    best = score
                    bx = cx
                    by = cy
            oxv[i] = bx
            oyv[i] = by
    return ox, oy


def ranging_scores(dists, z):
    """Sum of squared range residuals per lattice point."""
    d_a = np.ascontiguousarray(dists, dtype=np.float64)
    z_a = np.ascontiguousarray(z, dtype=np.float64)
    out = np.empty(d_a.shape[0], dtype=np.float64)
    cdef double[:, ::1] dv = d_a
    cdef double[::1] zv = z_a
    cdef double[::1] ov = out
    cdef Py_ssize_t n = dv.shape[0]
    cdef Py_ssize_t m = zv.shape[0]
    cdef Py_ssize_t i, j
    cdef double s, r
    with nogil:
        for i in range(n):
            s = 0.0
            for j in range(m):
                r = dv[i, j] - zv[j]
                s += r * r
            ov[i] = s
    return out
