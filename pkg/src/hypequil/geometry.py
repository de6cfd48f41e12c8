"""Hyperboloid (Lorentz) model of n-dimensional hyperbolic space.

Points live on the upper sheet {x : <x,x> = -1, x0 >= 1} of the unit
hyperboloid in Minkowski space with signature (-, +, ..., +), where
<u,v> = -u0 v0 + sum_i ui vi.  Distances are d(x,y) = arccosh(-<x,y>),
geodesic interpolation uses the sinh-ratio blend, and every composite
operation renormalizes its result back onto the sheet.

All functions are pure; nothing here mutates its arguments.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels as K
from .errors import InputError, InvariantViolation

SHEET_TOL = 1e-9
TANGENT_TOL = 1e-9


def minkowski_form(u, v) -> float:
    """Minkowski bilinear form -u0*v0 + sum_{i>=1} ui*vi.

    Accepts any equal-length real vectors; symmetric in its arguments.
    """
    u = np.asarray(u, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    if u.shape != v.shape or u.ndim != 1:
        raise InputError(f"dimension mismatch: {u.shape} vs {v.shape}")
    return K.mink(np.ascontiguousarray(u), np.ascontiguousarray(v))


def sheet_residual(x: np.ndarray) -> float:
    """Relative defect of the sheet equation <x,x> = -1.

    The raw residual is scaled by max(1, x0^2) because that is the size of
    the cancellation in <x,x>; an absolute test would reject freshly
    renormalized points far from the origin.
    """
    r = abs(K.mink(x, x) + 1.0)
    return r / max(1.0, x[0] * x[0])


def on_sheet(x: np.ndarray, tol: float = SHEET_TOL) -> bool:
    return x[0] >= 1.0 - tol and sheet_residual(x) <= tol


def check_point(x, name: str = "point") -> np.ndarray:
    """Validate and return a C-contiguous float64 hyperboloid point."""
    x = np.ascontiguousarray(x, dtype=np.float64)
    if x.ndim != 1 or x.shape[0] < 2:
        raise InputError(f"{name} must be a vector of length >= 2")
    if not on_sheet(x):
        raise InvariantViolation(
            f"{name} is off the hyperboloid sheet "
            f"(residual {sheet_residual(x):.3e}, x0 = {x[0]:.6g})"
        )
    return x


def hpoint(coords) -> np.ndarray:
    """Construct a validated, read-only hyperboloid point."""
    x = check_point(np.array(coords, dtype=np.float64))
    x.flags.writeable = False
    return x


def origin(dim: int = 2) -> np.ndarray:
    """Base point (1, 0, ..., 0) of H^dim."""
    x = np.zeros(dim + 1)
    x[0] = 1.0
    x.flags.writeable = False
    return x


def project_to_hyperboloid(raw) -> np.ndarray:
    """Scale a timelike, future-pointing vector onto the sheet.

    Idempotent on valid points.  Raises for spacelike input or a vector
    pointing at the past sheet.
    """
    raw = np.ascontiguousarray(raw, dtype=np.float64)
    q = K.mink(raw, raw)
    if q >= 0.0:
        raise InputError(f"cannot project a non-timelike vector (form = {q:.3e})")
    if raw[0] <= 0.0:
        raise InputError("vector points at the past sheet (x0 <= 0)")
    return K.normalize(raw)


def dist(x, y, check: bool = True) -> float:
    """Geodesic distance arccosh(-<x,y>), clamped below at 0."""
    if check:
        x = check_point(x, "x")
        y = check_point(y, "y")
    return K.dist(x, y)


def cosh_dist(x, y) -> float:
    """cosh of the geodesic distance; cheaper than dist when that suffices."""
    return K.cosh_dist(np.ascontiguousarray(x, np.float64),
                       np.ascontiguousarray(y, np.float64))


def geodesic_point(x, y, t: float, check: bool = True) -> np.ndarray:
    """The point z on [x, y] with d(x, z) = (1-t) d(x, y).

    t = 1 returns x and t = 0 returns y.  Separations below 1e-8 short
    circuit to a renormalized linear blend to avoid 0/0 in the sinh ratio.
    """
    if not 0.0 <= t <= 1.0:
        raise InputError(f"interpolation parameter t = {t} outside [0, 1]")
    if check:
        x = check_point(x, "x")
        y = check_point(y, "y")
    return K.geodesic_point(x, y, t)


@dataclass(frozen=True)
class TangentVec:
    """Minkowski-ambient vector tangent to the sheet at ``base``."""

    base: np.ndarray
    vec: np.ndarray

    def __post_init__(self):
        b = check_point(self.base, "base")
        v = np.ascontiguousarray(self.vec, dtype=np.float64)
        if v.shape != b.shape:
            raise InputError("tangent vector dimension mismatch")
        if abs(K.mink(b, v)) > TANGENT_TOL * max(1.0, float(np.abs(v).max()), b[0] * b[0]):
            raise InvariantViolation(
                f"vector is not tangent at its base (<base, vec> = {K.mink(b, v):.3e})"
            )
        object.__setattr__(self, "base", b)
        object.__setattr__(self, "vec", v)

    @property
    def norm(self) -> float:
        q = K.mink(self.vec, self.vec)
        if q < 0.0:
            raise InputError(f"tangent vector is not spacelike (form = {q:.3e})")
        return float(np.sqrt(q))


def tangent_project(p, w) -> np.ndarray:
    """Orthogonal projection of an ambient vector onto the tangent space at p."""
    return K.tangent_project(np.ascontiguousarray(p, np.float64),
                             np.ascontiguousarray(w, np.float64))


def exp_map(v: TangentVec) -> np.ndarray:
    """Follow the geodesic from v.base with initial velocity v for length |v|."""
    return K.exp_map(v.base, v.vec, v.norm)


def exp_map_raw(base: np.ndarray, vec: np.ndarray) -> np.ndarray:
    """exp map on raw arrays; trusts that ``vec`` is tangent at ``base``."""
    q = K.mink(vec, vec)
    if q < 0.0:
        raise InputError(f"tangent vector is not spacelike (form = {q:.3e})")
    return K.exp_map(base, vec, float(np.sqrt(q)))


def log_map(x, y, check: bool = True) -> TangentVec:
    """Tangent vector v at x with exp_map(v) = y and |v| = d(x, y)."""
    if check:
        x = check_point(x, "x")
        y = check_point(y, "y")
    return TangentVec(base=x, vec=K.log_map(x, y))


def log_map_raw(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    return K.log_map(x, y)


@dataclass(frozen=True)
class GeodesicSegment:
    """Geodesic segment [a, b] with the interpolation convention of
    ``geodesic_point``: point_at(1) = a, point_at(0) = b."""

    a: np.ndarray
    b: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "a", check_point(self.a, "a"))
        object.__setattr__(self, "b", check_point(self.b, "b"))

    @property
    def length(self) -> float:
        return K.dist(self.a, self.b)

    def point_at(self, t: float) -> np.ndarray:
        return geodesic_point(self.a, self.b, t, check=False)


def point_to_list(x: np.ndarray) -> list:
    """Plain-float coordinate list for JSON output."""
    return [float(c) for c in x]


def to_poincare_disk(x: np.ndarray) -> np.ndarray:
    """Spatial coordinates divided by 1 + x0; used only for plotting."""
    return np.asarray(x)[1:] / (1.0 + x[0])
