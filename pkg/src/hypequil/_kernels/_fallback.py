"""Pure NumPy implementations of the hot kernels.

Mirror of the native extension's API.  Every function here assumes its
point inputs already lie on the upper hyperboloid sheet; validation
happens in the public geometry layer, not in the kernels.

Conventions shared by both backends:

* points are float64 vectors ``(x0, x1, ..., xn)`` with
  ``-x0^2 + sum(xi^2) = -1`` and ``x0 >= 1``;
* batches are C-contiguous arrays of shape ``(m, n+1)``, one point per row;
* ``cosh d(x, y) = -<x, y>`` under the Minkowski form, clamped to ``>= 1``.
"""

from __future__ import annotations

import numpy as np

BACKEND_NAME = "numpy"

# Below this separation the sinh-ratio blend degenerates; use a linear mix.
TINY_DIST = 1e-8


def mink(u: np.ndarray, v: np.ndarray) -> float:
    """Minkowski bilinear form -u0*v0 + sum_i ui*vi."""
    return float(np.dot(u[1:], v[1:]) - u[0] * v[0])


def mink_rows(rows: np.ndarray, v: np.ndarray) -> np.ndarray:
    """Minkowski form of each row of ``rows`` against ``v``."""
    return rows[:, 1:] @ v[1:] - rows[:, 0] * v[0]


def cosh_dist(x: np.ndarray, y: np.ndarray) -> float:
    return max(1.0, -mink(x, y))


def dist(x: np.ndarray, y: np.ndarray) -> float:
    """Geodesic distance, snapped to 0 for coordinatewise-coincident points.

    arccosh amplifies rounding in <x,y> near 1 to ~sqrt(eps), so without
    the snap even dist(x, x) can report ~1e-8 for far-out points.
    """
    if np.max(np.abs(x - y)) <= 1e-9:
        return 0.0
    return float(np.arccosh(cosh_dist(x, y)))


def cosh_dist_rows(rows: np.ndarray, q: np.ndarray) -> np.ndarray:
    """cosh of the distance from every row point to ``q``."""
    return np.maximum(1.0, -mink_rows(rows, q))


def cosh_dist_table(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Pairwise cosh-distance matrix, shape ``(len(a), len(b))``."""
    g = a[:, 1:] @ b[:, 1:].T - np.outer(a[:, 0], b[:, 0])
    return np.maximum(1.0, -g)


def dist_rows(rows: np.ndarray, q: np.ndarray) -> np.ndarray:
    return np.arccosh(cosh_dist_rows(rows, q))


def normalize(raw: np.ndarray) -> np.ndarray:
    """Scale a timelike future-pointing vector back onto the sheet."""
    return raw / np.sqrt(-mink(raw, raw))


def resheet(p: np.ndarray) -> np.ndarray:
    """Put a near-sheet point exactly back on the sheet by recomputing the
    time coordinate from the spatial ones.

    Unlike radial rescaling this involves no cancellation, so it is the
    right fix-up after geodesic arithmetic at large coordinates, where
    <p,p> + 1 is dominated by rounding noise of size eps * p0^2.
    """
    out = p.copy()
    out[0] = np.sqrt(1.0 + np.dot(p[1:], p[1:]))
    return out


def geodesic_point(x: np.ndarray, y: np.ndarray, t: float) -> np.ndarray:
    """Point z on [x, y] with d(x, z) = (1-t) d(x, y)."""
    d = dist(x, y)
    if d < TINY_DIST:
        w = t * x + (1.0 - t) * y
    else:
        w = (np.sinh(t * d) * x + np.sinh((1.0 - t) * d) * y) / np.sinh(d)
    return resheet(w)


def exp_map(base: np.ndarray, vec: np.ndarray, nrm: float) -> np.ndarray:
    """Geodesic endpoint from ``base`` along tangent ``vec`` of norm ``nrm``."""
    if nrm < 1e-12:
        return base.copy()
    return resheet(np.cosh(nrm) * base + np.sinh(nrm) * (vec / nrm))


def log_map(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Tangent vector v at x with exp(x, v) = y and |v| = d(x, y)."""
    d = dist(x, y)
    if d < 1e-12:
        return np.zeros_like(x)
    w = y + mink(x, y) * x  # tangent projection of y at x; |w| = sinh d
    return (d / np.sinh(d)) * w


def tangent_project(p: np.ndarray, w: np.ndarray) -> np.ndarray:
    """Project an ambient vector onto the tangent space at p."""
    return w + mink(p, w) * p


def batch_exp_map(base: np.ndarray, dirs: np.ndarray, radii: np.ndarray) -> np.ndarray:
    """Vectorized exp map from one base along unit tangent rows ``dirs``."""
    pts = np.cosh(radii)[:, None] * base[None, :] + np.sinh(radii)[:, None] * dirs
    pts[:, 0] = np.sqrt(1.0 + (pts[:, 1:] ** 2).sum(axis=1))
    return pts


def stewart_worst(xs, ys, zs, ts):
    """Worst relative error of the geodesic cosh identity over trials.

    For each row: cosh d(t x + (1-t) y, z) sinh d(x, y) versus
    cosh d(x, z) sinh(t d(x, y)) + cosh d(y, z) sinh((1-t) d(x, y)).
    Rows with d(x, y) below TINY_DIST are degenerate (0 = 0) and score 0.
    Returns (worst_relative_error, trial_index).
    """
    cxy = np.maximum(1.0, -(np.sum(xs[:, 1:] * ys[:, 1:], axis=1) - xs[:, 0] * ys[:, 0]))
    d = np.arccosh(cxy)
    ok = d >= TINY_DIST
    sd = np.sinh(d)
    t = ts
    # geodesic blend rows (degenerate rows filled with x; their error is 0)
    with np.errstate(invalid="ignore", divide="ignore"):
        w = (np.sinh(t * d)[:, None] * xs + np.sinh((1.0 - t) * d)[:, None] * ys) / sd[:, None]
    w = np.where(ok[:, None], w, xs)
    w[:, 0] = np.sqrt(1.0 + (w[:, 1:] ** 2).sum(axis=1))
    cwz = np.maximum(1.0, -(np.sum(w[:, 1:] * zs[:, 1:], axis=1) - w[:, 0] * zs[:, 0]))
    cxz = np.maximum(1.0, -(np.sum(xs[:, 1:] * zs[:, 1:], axis=1) - xs[:, 0] * zs[:, 0]))
    cyz = np.maximum(1.0, -(np.sum(ys[:, 1:] * zs[:, 1:], axis=1) - ys[:, 0] * zs[:, 0]))
    lhs = cwz * sd
    rhs = cxz * np.sinh(t * d) + cyz * np.sinh((1.0 - t) * d)
    rel = np.where(ok, np.abs(lhs - rhs) / np.where(rhs > 0, rhs, 1.0), 0.0)
    idx = int(np.argmax(rel))
    return float(rel[idx]), idx


def cosh_convexity_worst(xs, ys, zs, ts):
    """Most negative slack of t cosh d(x,z) + (1-t) cosh d(y,z) - cosh d(m,z).

    Returns (worst_slack, trial_index); slack >= 0 means the convexity
    inequality held on that trial.
    """
    cxy = np.maximum(1.0, -(np.sum(xs[:, 1:] * ys[:, 1:], axis=1) - xs[:, 0] * ys[:, 0]))
    d = np.arccosh(cxy)
    ok = d >= TINY_DIST
    sd = np.sinh(d)
    t = ts
    with np.errstate(invalid="ignore", divide="ignore"):
        w = (np.sinh(t * d)[:, None] * xs + np.sinh((1.0 - t) * d)[:, None] * ys) / sd[:, None]
    w = np.where(ok[:, None], w, xs)
    w[:, 0] = np.sqrt(1.0 + (w[:, 1:] ** 2).sum(axis=1))
    cwz = np.maximum(1.0, -(np.sum(w[:, 1:] * zs[:, 1:], axis=1) - w[:, 0] * zs[:, 0]))
    cxz = np.maximum(1.0, -(np.sum(xs[:, 1:] * zs[:, 1:], axis=1) - xs[:, 0] * zs[:, 0]))
    cyz = np.maximum(1.0, -(np.sum(ys[:, 1:] * zs[:, 1:], axis=1) - ys[:, 0] * zs[:, 0]))
    slack = np.where(ok, t * cxz + (1.0 - t) * cyz - cwz, t * cxz + (1.0 - t) * cyz - cxz)
    idx = int(np.argmin(slack))
    return float(slack[idx]), idx


def oracle_scan_diff(t_vals: np.ndarray, f_vals: np.ndarray):
    """Exhaustive grid oracle for separable bifunctions f(z,y) = G[y] - G[z].

    The inner scan min_y (T[y] - F[z]) collapses to min(T) - F[z] exactly
    (subtracting a constant is monotone in IEEE arithmetic), so the outer
    argmax reduces to the argmin of F.  Ties break to the lowest index.
    Returns (index, attained_min).
    """
    idx = int(np.argmin(f_vals))
    return idx, float(np.min(t_vals) - f_vals[idx])


def oracle_scan_penalized(points: np.ndarray, t_vals: np.ndarray, f_vals: np.ndarray,
                          mu: float, block: int = 512):
    """Exhaustive grid oracle for f(z,y) = G[y] - G[z] - mu (cosh d(z,y) - 1).

    Maximizes  min_y (T[y] - mu cosh d(z,y)) - F[z] + mu  over candidate
    rows z, streaming the pairwise cosh-distance table in blocks to bound
    memory.  Returns (index, attained_min).
    """
    n = points.shape[0]
    best_val = -np.inf
    best_idx = 0
    sp = points[:, 1:]
    t0 = points[:, 0]
    for lo in range(0, n, block):
        hi = min(n, lo + block)
        cd = np.maximum(1.0, -(sp[lo:hi] @ sp.T - np.outer(t0[lo:hi], t0)))
        inner = np.min(t_vals[None, :] - mu * cd, axis=1) - f_vals[lo:hi] + mu
        j = int(np.argmax(inner))
        if inner[j] > best_val:
            best_val = float(inner[j])
            best_idx = lo + j
    return best_idx, best_val
