# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled hot kernels: scalar hyperboloid primitives, batched identity
checks, and the exhaustive grid-oracle scans.

API mirror of ``_fallback``; see that module for the shared conventions.
The inputs are trusted to lie on the sheet.
"""

from libc.math cimport sqrt, sinh, cosh, acosh, fabs, INFINITY

import numpy as np

BACKEND_NAME = "native"

cdef double TINY_DIST = 1e-8


cdef inline double _mink(const double[::1] u, const double[::1] v) noexcept nogil:
    cdef Py_ssize_t i, n = u.shape[0]
    cdef double s = -u[0] * v[0]
    for i in range(1, n):
        s += u[i] * v[i]
    return s


cdef inline double _cosh_dist(const double[::1] x, const double[::1] y) noexcept nogil:
    cdef double c = -_mink(x, y)
    return c if c > 1.0 else 1.0


cdef inline double _row_mink(const double[:, ::1] rows, Py_ssize_t r,
                             const double[:, ::1] other, Py_ssize_t o) noexcept nogil:
    cdef Py_ssize_t i, n = rows.shape[1]
    cdef double s = -rows[r, 0] * other[o, 0]
    for i in range(1, n):
        s += rows[r, i] * other[o, i]
    return s


def mink(const double[::1] u, const double[::1] v):
    return _mink(u, v)


def mink_rows(const double[:, ::1] rows, const double[::1] v):
    out = np.empty(rows.shape[0], dtype=np.float64)
    cdef double[::1] o = out
    cdef Py_ssize_t r
    with nogil:
        for r in range(rows.shape[0]):
            o[r] = _vrow_mink(rows, r, v)
    return out


cdef inline double _vrow_mink(const double[:, ::1] rows, Py_ssize_t r,
                              const double[::1] v) noexcept nogil:
    cdef Py_ssize_t i, n = rows.shape[1]
    cdef double s = -rows[r, 0] * v[0]
    for i in range(1, n):
        s += rows[r, i] * v[i]
    return s


def cosh_dist(const double[::1] x, const double[::1] y):
    return _cosh_dist(x, y)


cdef inline bint _coincident(const double[::1] x, const double[::1] y) noexcept nogil:
    cdef Py_ssize_t i
    for i in range(x.shape[0]):
        if fabs(x[i] - y[i]) > 1e-9:
            return 0
    return 1


def dist(const double[::1] x, const double[::1] y):
    """Geodesic distance, snapped to 0 for coordinatewise-coincident
    points (arccosh near 1 amplifies rounding to ~sqrt(eps))."""
    if _coincident(x, y):
        return 0.0
    return acosh(_cosh_dist(x, y))


def cosh_dist_rows(const double[:, ::1] rows, const double[::1] q):
    out = np.empty(rows.shape[0], dtype=np.float64)
    cdef double[::1] o = out
    cdef double c
    cdef Py_ssize_t r
    with nogil:
        for r in range(rows.shape[0]):
            c = -_vrow_mink(rows, r, q)
            o[r] = c if c > 1.0 else 1.0
    return out


def cosh_dist_table(const double[:, ::1] a, const double[:, ::1] b):
    out = np.empty((a.shape[0], b.shape[0]), dtype=np.float64)
    cdef double[:, ::1] o = out
    cdef double c
    cdef Py_ssize_t i, j
    with nogil:
        for i in range(a.shape[0]):
            for j in range(b.shape[0]):
                c = -_row_mink(a, i, b, j)
                o[i, j] = c if c > 1.0 else 1.0
    return out


def dist_rows(const double[:, ::1] rows, const double[::1] q):
    out = np.empty(rows.shape[0], dtype=np.float64)
    cdef double[::1] o = out
    cdef double c
    cdef Py_ssize_t r
    with nogil:
        for r in range(rows.shape[0]):
            c = -_vrow_mink(rows, r, q)
            o[r] = acosh(c if c > 1.0 else 1.0)
    return out


cdef inline void _normalize_into(const double[::1] raw, double[::1] out) noexcept nogil:
    cdef double s = sqrt(-_mink(raw, raw))
    cdef Py_ssize_t i
    for i in range(raw.shape[0]):
        out[i] = raw[i] / s


cdef inline void _resheet(double[::1] p) noexcept nogil:
    # recompute the time coordinate from the spatial ones: cancellation-free
    # fix-up after geodesic arithmetic (see the fallback's resheet)
    cdef double s = 0.0
    cdef Py_ssize_t i
    for i in range(1, p.shape[0]):
        s += p[i] * p[i]
    p[0] = sqrt(1.0 + s)


def normalize(const double[::1] raw):
    out = np.empty(raw.shape[0], dtype=np.float64)
    cdef double[::1] o = out
    _normalize_into(raw, o)
    return out


def resheet(const double[::1] p):
    out = np.array(p, dtype=np.float64)
    cdef double[::1] o = out
    _resheet(o)
    return out


def geodesic_point(const double[::1] x, const double[::1] y, double t):
    cdef Py_ssize_t i, n = x.shape[0]
    out = np.empty(n, dtype=np.float64)
    cdef double[::1] o = out
    cdef double d = 0.0 if _coincident(x, y) else acosh(_cosh_dist(x, y))
    cdef double sa, sb, sd
    if d < TINY_DIST:
        for i in range(n):
            o[i] = t * x[i] + (1.0 - t) * y[i]
    else:
        sd = sinh(d)
        sa = sinh(t * d) / sd
        sb = sinh((1.0 - t) * d) / sd
        for i in range(n):
            o[i] = sa * x[i] + sb * y[i]
    _resheet(o)
    return out


def exp_map(const double[::1] base, const double[::1] vec, double nrm):
    cdef Py_ssize_t i, n = base.shape[0]
    out = np.empty(n, dtype=np.float64)
    cdef double[::1] o = out
    cdef double ch, sh
    if nrm < 1e-12:
        for i in range(n):
            o[i] = base[i]
        return out
    ch = cosh(nrm)
    sh = sinh(nrm) / nrm
    for i in range(n):
        o[i] = ch * base[i] + sh * vec[i]
    _resheet(o)
    return out


def log_map(const double[::1] x, const double[::1] y):
    cdef Py_ssize_t i, n = x.shape[0]
    out = np.zeros(n, dtype=np.float64)
    cdef double[::1] o = out
    cdef double m = _mink(x, y)
    cdef double c = -m if -m > 1.0 else 1.0
    cdef double d = acosh(c)
    cdef double scale
    if d < 1e-12:
        return out
    scale = d / sinh(d)
    for i in range(n):
        o[i] = scale * (y[i] + m * x[i])
    return out


def tangent_project(const double[::1] p, const double[::1] w):
    cdef Py_ssize_t i, n = p.shape[0]
    out = np.empty(n, dtype=np.float64)
    cdef double[::1] o = out
    cdef double m = _mink(p, w)
    for i in range(n):
        o[i] = w[i] + m * p[i]
    return out


def batch_exp_map(const double[::1] base, const double[:, ::1] dirs,
                  const double[::1] radii):
    cdef Py_ssize_t r, i, m = dirs.shape[0], n = dirs.shape[1]
    out = np.empty((m, n), dtype=np.float64)
    cdef double[:, ::1] o = out
    cdef double ch, sh, s
    with nogil:
        for r in range(m):
            ch = cosh(radii[r])
            sh = sinh(radii[r])
            s = 0.0
            for i in range(n):
                o[r, i] = ch * base[i] + sh * dirs[r, i]
            s = 0.0
            for i in range(1, n):
                s += o[r, i] * o[r, i]
            o[r, 0] = sqrt(1.0 + s)
    return out


def stewart_worst(const double[:, ::1] xs, const double[:, ::1] ys,
                  const double[:, ::1] zs, const double[::1] ts):
    """Worst relative error of the geodesic cosh identity; see fallback."""
    cdef Py_ssize_t r, i, m = xs.shape[0], n = xs.shape[1]
    cdef double worst = -INFINITY
    cdef Py_ssize_t worst_idx = 0
    cdef double cxy, d, sd, sa, sb, s, cwz, cxz, cyz, lhs, rhs, rel, t
    cdef double w[64]
    if n > 64:
        raise ValueError("dimension too large for the native kernel")
    with nogil:
        for r in range(m):
            cxy = -_row_mink(xs, r, ys, r)
            if cxy < 1.0:
                cxy = 1.0
            d = acosh(cxy)
            t = ts[r]
            if d < TINY_DIST:
                rel = 0.0
            else:
                sd = sinh(d)
                sa = sinh(t * d) / sd
                sb = sinh((1.0 - t) * d) / sd
                s = 0.0
                for i in range(n):
                    w[i] = sa * xs[r, i] + sb * ys[r, i]
                s = 0.0
                for i in range(1, n):
                    s += w[i] * w[i]
                w[0] = sqrt(1.0 + s)
                cwz = w[0] * zs[r, 0]
                for i in range(1, n):
                    cwz -= w[i] * zs[r, i]
                if cwz < 1.0:
                    cwz = 1.0
                cxz = -_row_mink(xs, r, zs, r)
                if cxz < 1.0:
                    cxz = 1.0
                cyz = -_row_mink(ys, r, zs, r)
                if cyz < 1.0:
                    cyz = 1.0
                lhs = cwz * sd
                rhs = cxz * sinh(t * d) + cyz * sinh((1.0 - t) * d)
                rel = fabs(lhs - rhs) / rhs
            if rel > worst:
                worst = rel
                worst_idx = r
    return worst, worst_idx


def cosh_convexity_worst(const double[:, ::1] xs, const double[:, ::1] ys,
                         const double[:, ::1] zs, const double[::1] ts):
    """Most negative convexity slack; see fallback."""
    cdef Py_ssize_t r, i, m = xs.shape[0], n = xs.shape[1]
    cdef double worst = INFINITY
    cdef Py_ssize_t worst_idx = 0
    cdef double cxy, d, sd, sa, sb, s, cwz, cxz, cyz, slack, t
    cdef double w[64]
    if n > 64:
        raise ValueError("dimension too large for the native kernel")
    with nogil:
        for r in range(m):
            cxy = -_row_mink(xs, r, ys, r)
            if cxy < 1.0:
                cxy = 1.0
            d = acosh(cxy)
            t = ts[r]
            cxz = -_row_mink(xs, r, zs, r)
            if cxz < 1.0:
                cxz = 1.0
            cyz = -_row_mink(ys, r, zs, r)
            if cyz < 1.0:
                cyz = 1.0
            if d < TINY_DIST:
                slack = t * cxz + (1.0 - t) * cyz - cxz
            else:
                sd = sinh(d)
                sa = sinh(t * d) / sd
                sb = sinh((1.0 - t) * d) / sd
                for i in range(n):
                    w[i] = sa * xs[r, i] + sb * ys[r, i]
                s = 0.0
                for i in range(1, n):
                    s += w[i] * w[i]
                w[0] = sqrt(1.0 + s)
                cwz = w[0] * zs[r, 0]
                for i in range(1, n):
                    cwz -= w[i] * zs[r, i]
                if cwz < 1.0:
                    cwz = 1.0
                slack = t * cxz + (1.0 - t) * cyz - cwz
            if slack < worst:
                worst = slack
                worst_idx = r
    return worst, worst_idx


def oracle_scan_diff(const double[::1] t_vals, const double[::1] f_vals):
    """Grid oracle for f(z,y) = G[y] - G[z]; see fallback for the collapse."""
    cdef Py_ssize_t i, n = f_vals.shape[0]
    cdef Py_ssize_t best = 0
    cdef double tmin = INFINITY
    with nogil:
        for i in range(n):
            if f_vals[i] < f_vals[best]:
                best = i
        for i in range(n):
            if t_vals[i] < tmin:
                tmin = t_vals[i]
    return best, tmin - f_vals[best]


def oracle_scan_penalized(const double[:, ::1] points, const double[::1] t_vals,
                          const double[::1] f_vals, double mu):
    """Grid oracle for f(z,y) = G[y] - G[z] - mu (cosh d(z,y) - 1).

    Streams the pairwise table with early-exit pruning: once a row's
    running minimum drops below the incumbent, no later column can raise
    it, so the row is abandoned.  Lowest index wins ties.
    """
    cdef Py_ssize_t z, y, n = points.shape[0]
    cdef Py_ssize_t best_idx = 0
    cdef double best_val = -INFINITY
    cdef double inner, cd, val, cutoff
    with nogil:
        for z in range(n):
            cutoff = best_val + f_vals[z] - mu  # inner min below this cannot win
            inner = INFINITY
            for y in range(n):
                cd = -_row_mink(points, z, points, y)
                if cd < 1.0:
                    cd = 1.0
                val = t_vals[y] - mu * cd
                if val < inner:
                    inner = val
                    if inner <= cutoff:
                        break
            val = inner - f_vals[z] + mu
            if val > best_val:
                best_val = val
                best_idx = z
    return best_idx, best_val
