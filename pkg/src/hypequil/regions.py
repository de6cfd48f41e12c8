"""Closed convex subsets of H^n: membership, metric projection, sampling,
covering grids, and iterated geodesic-combination hulls.

Four region variants: geodesic balls, Minkowski half-spaces bounded by
totally geodesic hyperplanes, finite intersections (with a stored witness
point certifying nonemptiness), and the whole space.  Regions are
immutable after construction.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import _kernels as K
from . import geometry as geo
from .errors import (ConvergenceError, DegenerateRegionError, InputError,
                     SamplingError)

CONTAIN_TOL = 1e-9
PROJECT_STOP = 1e-10
PROJECT_MAX_SWEEPS = 10_000


class ConvexRegion:
    """Interface shared by all region variants."""

    dim: int

    def contains(self, x: np.ndarray, tol: float = CONTAIN_TOL) -> bool:
        raise NotImplementedError

    def contains_batch(self, pts: np.ndarray, tol: float = CONTAIN_TOL) -> np.ndarray:
        """Boolean mask over rows of ``pts``."""
        raise NotImplementedError

    def project(self, x: np.ndarray) -> np.ndarray:
        """Nearest point of the region (closed form per variant; cyclic
        alternating projection for intersections, which is approximate)."""
        raise NotImplementedError

    def witness(self) -> np.ndarray:
        """A point certified to lie in the region."""
        raise NotImplementedError

    def descriptor(self) -> dict:
        raise NotImplementedError


@dataclass(frozen=True, eq=False)
class Ball(ConvexRegion):
    center: np.ndarray
    radius: float

    def __post_init__(self):
        c = geo.check_point(self.center, "center")
        if not self.radius > 0.0:
            raise InputError(f"ball radius must be positive, got {self.radius}")
        object.__setattr__(self, "center", c)
        object.__setattr__(self, "dim", c.shape[0] - 1)

    def contains(self, x, tol=CONTAIN_TOL):
        return K.dist(x, self.center) <= self.radius + tol

    def contains_batch(self, pts, tol=CONTAIN_TOL):
        return K.dist_rows(pts, self.center) <= self.radius + tol

    def project(self, x):
        d = K.dist(x, self.center)
        if d <= self.radius:
            return np.asarray(x, dtype=np.float64)
        # point at distance radius from the center along [center, x];
        # the blend satisfies d(center, z) = (1 - t) d(center, x)
        return K.geodesic_point(self.center, x, 1.0 - self.radius / d)

    def witness(self):
        return self.center

    def descriptor(self):
        return {"type": "ball", "center": geo.point_to_list(self.center),
                "radius": float(self.radius)}


@dataclass(frozen=True, eq=False)
class HalfSpace(ConvexRegion):
    """{x on the sheet : <x, normal> <= 0} for a unit spacelike normal.

    A normal with positive Minkowski norm is rescaled to unit norm at
    construction.
    """

    normal: np.ndarray

    def __post_init__(self):
        nrm = np.ascontiguousarray(self.normal, dtype=np.float64)
        q = K.mink(nrm, nrm)
        if q <= 0.0:
            raise InputError(f"half-space normal must be spacelike (form = {q:.3e})")
        object.__setattr__(self, "normal", nrm / np.sqrt(q))
        object.__setattr__(self, "dim", nrm.shape[0] - 1)

    def contains(self, x, tol=CONTAIN_TOL):
        return K.mink(np.ascontiguousarray(x, np.float64), self.normal) <= tol

    def contains_batch(self, pts, tol=CONTAIN_TOL):
        return K.mink_rows(pts, self.normal) <= tol

    def project(self, x):
        s = K.mink(x, self.normal)
        if s <= 0.0:
            return np.asarray(x, dtype=np.float64)
        # nearest point on the boundary hyperplane: remove the normal
        # component and renormalize; d(x, boundary) = arcsinh(s)
        return K.normalize(x - s * self.normal)

    def witness(self):
        base = geo.origin(self.dim)
        p = self.project(base)
        # step off the boundary into the interior; the normal is tangent
        # at any boundary point
        v = -self.normal + K.mink(p, -self.normal) * p
        q = K.mink(v, v)
        if q <= 0:
            return p
        return K.exp_map(p, v, float(np.sqrt(q)))

    def descriptor(self):
        return {"type": "halfspace", "normal": geo.point_to_list(self.normal)}


@dataclass(frozen=True, eq=False)
class WholeSpace(ConvexRegion):
    dim: int = 2

    def contains(self, x, tol=CONTAIN_TOL):
        return True

    def contains_batch(self, pts, tol=CONTAIN_TOL):
        return np.ones(pts.shape[0], dtype=bool)

    def project(self, x):
        return np.asarray(x, dtype=np.float64)

    def witness(self):
        return geo.origin(self.dim)

    def descriptor(self):
        return {"type": "whole-space", "dimension": self.dim}


@dataclass(frozen=True, eq=False)
class Intersection(ConvexRegion):
    """Finite intersection of regions, nonempty by a stored witness.

    When no witness is supplied the constructor runs cyclic alternating
    projection from the first member's witness and fails if that does not
    land inside every member.
    """

    members: tuple
    witness_point: np.ndarray = field(default=None)

    def __post_init__(self):
        members = tuple(self.members)
        if not members:
            raise InputError("intersection needs at least one member")
        dims = {m.dim for m in members}
        if len(dims) != 1:
            raise InputError(f"member dimensions disagree: {sorted(dims)}")
        object.__setattr__(self, "members", members)
        object.__setattr__(self, "dim", members[0].dim)
        w = self.witness_point
        if w is None:
            w = _alternating_projection(members, members[0].witness())
        else:
            w = geo.check_point(w, "witness")
        if not all(m.contains(w, CONTAIN_TOL) for m in members):
            raise InputError("could not certify a nonempty intersection")
        object.__setattr__(self, "witness_point", w)

    def contains(self, x, tol=CONTAIN_TOL):
        return all(m.contains(x, tol) for m in self.members)

    def contains_batch(self, pts, tol=CONTAIN_TOL):
        mask = np.ones(pts.shape[0], dtype=bool)
        for m in self.members:
            mask &= m.contains_batch(pts, tol)
        return mask

    def project(self, x):
        if self.contains(x):
            return np.asarray(x, dtype=np.float64)
        return _alternating_projection(self.members, x)

    def witness(self):
        return self.witness_point

    def descriptor(self):
        return {"type": "intersection",
                "members": [m.descriptor() for m in self.members]}


def _alternating_projection(members, start):
    p = np.asarray(start, dtype=np.float64)
    for _ in range(PROJECT_MAX_SWEEPS):
        q = p
        for m in members:
            q = m.project(q)
        if K.dist(p, q) < PROJECT_STOP:
            return q
        p = q
    raise ConvergenceError(
        f"alternating projection did not settle in {PROJECT_MAX_SWEEPS} sweeps")


@dataclass(frozen=True, eq=False)
class PointGrid:
    """Finite point set covering a region: every region point within the
    build's bounding ball has a grid point within ``spacing``."""

    points: np.ndarray  # (N, dim+1), C-contiguous
    spacing: float

    def __len__(self):
        return self.points.shape[0]

    def nearest_index(self, x: np.ndarray) -> int:
        return int(np.argmax(-K.cosh_dist_rows(self.points, x)))

    def nearest_dist(self, x: np.ndarray) -> float:
        return float(np.min(K.dist_rows(self.points, x)))


def _tangent_basis_dirs(rng, base, count):
    """Unit tangent directions at ``base``, seeded."""
    g = rng.standard_normal((count, base.shape[0]))
    g += K.mink_rows(np.ascontiguousarray(g), base)[:, None] * base[None, :]
    # tangent vectors have positive Minkowski norm: -v0^2 + |v_sp|^2 > 0
    nrm = np.sqrt(np.maximum(1e-300, (g[:, 1:] ** 2).sum(axis=1) - g[:, 0] ** 2))
    return g / nrm[:, None]


def sample(region: ConvexRegion, seed: int, count: int,
           bounding_radius: float) -> np.ndarray:
    """Rejection sampler: exp map of a uniform tangent ball at the witness.

    Deterministic for a fixed seed.  Raises SamplingError when the
    acceptance rate over a million proposals stays under 0.1%.
    """
    if count < 0:
        raise InputError("count must be nonnegative")
    if bounding_radius <= 0:
        raise InputError("bounding radius must be positive")
    w = region.witness()
    dim = region.dim
    out = np.empty((count, dim + 1))
    if count == 0:
        return out
    rng = np.random.default_rng(seed)
    got = 0
    proposed = 0
    batch = max(64, min(4096, 4 * count))
    while got < count:
        dirs = _tangent_basis_dirs(rng, w, batch)
        radii = bounding_radius * rng.random(batch) ** (1.0 / dim)
        pts = K.batch_exp_map(w, np.ascontiguousarray(dirs), radii)
        mask = region.contains_batch(pts, 0.0)
        take = pts[mask][: count - got]
        out[got: got + take.shape[0]] = take
        got += take.shape[0]
        proposed += batch
        if proposed >= 1_000_000 and got < 0.001 * proposed:
            raise SamplingError(
                f"acceptance rate {got}/{proposed} below 0.1% "
                f"(bounding radius {bounding_radius})")
    return out


def _polar_ring_counts(radii, arc_step):
    return [max(1, int(np.ceil(2.0 * np.pi * np.sinh(r) / arc_step))) for r in radii]


def _polar_grid_2d(witness, r_max, radial_step, arc_step, phase):
    """Concentric geodesic circles around the witness (dimension 2)."""
    e1 = K.tangent_project(witness, np.array([0.0, 1.0, 0.0]))
    q = K.mink(e1, e1)
    if q < 1e-12:  # witness on the x1 axis far out; use x2 instead
        e1 = K.tangent_project(witness, np.array([0.0, 0.0, 1.0]))
        q = K.mink(e1, e1)
    e1 = e1 / np.sqrt(q)
    e2 = K.tangent_project(witness, np.array([0.0, 0.0, 1.0]))
    e2 = e2 - K.mink(e2, e1) * e1
    q2 = K.mink(e2, e2)
    if q2 < 1e-12:
        e2 = K.tangent_project(witness, np.array([0.0, 1.0, 0.0]))
        e2 = e2 - K.mink(e2, e1) * e1
        q2 = K.mink(e2, e2)
    e2 = e2 / np.sqrt(q2)

    chunks = [witness[None, :]]
    radii = []
    r = radial_step * (1.0 - 0.5 * phase[0])
    while r < r_max - 1e-12:
        radii.append(r)
        r += radial_step
    radii.append(r_max)
    for r in radii:
        m = max(1, int(np.ceil(2.0 * np.pi * np.sinh(r) / arc_step)))
        ang = 2.0 * np.pi * (np.arange(m) + phase[1]) / m
        dirs = np.cos(ang)[:, None] * e1[None, :] + np.sin(ang)[:, None] * e2[None, :]
        chunks.append(K.batch_exp_map(witness, np.ascontiguousarray(dirs),
                                      np.full(m, r)))
    return np.ascontiguousarray(np.concatenate(chunks, axis=0))


def build_grid(region: ConvexRegion, spacing: float, bounding_radius: float,
               phase_seed: int = 0) -> PointGrid:
    """Covering grid of the region within ``bounding_radius`` of its witness.

    Dimension 2 uses geodesic polar rings (hyperbolic area growth makes
    Cartesian parameter grids badly nonuniform); higher dimensions fall
    back to a seeded point cloud.  Candidates outside the region are
    replaced by their metric projections when those stay close, which
    keeps the boundary covered.  The advertised spacing is verified
    against 128 sampled probes and the grid is densified until it holds.
    """
    if spacing <= 0:
        raise InputError("spacing must be positive")
    if bounding_radius <= 0:
        raise InputError("bounding radius must be positive")
    w = region.witness()
    r_max = bounding_radius
    if isinstance(region, Ball):
        # everything of the ball lies within dist(w, center) + radius
        r_max = min(r_max, K.dist(w, region.center) + region.radius)

    phase_rng = np.random.default_rng(phase_seed)
    phase = (float(phase_rng.random()), float(phase_rng.random()))

    step = spacing / np.sqrt(2.0)
    for _ in range(4):
        if region.dim == 2:
            cand = _polar_grid_2d(w, r_max, step, step, phase)
        else:
            vol = float(np.sinh(r_max) ** region.dim)
            n_cloud = min(200_000, max(64, int(8 * vol / step ** region.dim)))
            cand = sample(_BoundingBall(region, w, r_max), phase_seed, n_cloud,
                          r_max)
        mask = region.contains_batch(cand, CONTAIN_TOL)
        kept = [cand[mask]]
        outside = cand[~mask]
        if outside.shape[0]:
            # replace near-boundary rejects by their projections so curved
            # boundaries stay covered; unprojectable points are dropped
            proj = []
            for p in outside:
                p = np.ascontiguousarray(p)
                try:
                    q = region.project(p)
                except ConvergenceError:
                    continue
                if K.dist(p, q) <= spacing and region.contains(q, CONTAIN_TOL):
                    proj.append(q)
            if proj:
                kept.append(np.ascontiguousarray(np.array(proj)))
        pts = np.ascontiguousarray(np.concatenate(kept, axis=0))
        if pts.shape[0] == 0:
            raise DegenerateRegionError(
                "no grid points; region may not meet its bounding ball")
        grid = PointGrid(points=pts, spacing=float(spacing))
        if _covering_ok(region, grid, w, r_max, spacing):
            return grid
        step /= np.sqrt(2.0)
    raise DegenerateRegionError(
        f"could not reach covering radius {spacing} after densification")


class _BoundingBall(ConvexRegion):
    """Internal: region intersected with the bounding ball, for sampling."""

    def __init__(self, region, center, radius):
        self._region = region
        self._ball = Ball(center=center, radius=radius)
        self.dim = region.dim

    def contains(self, x, tol=CONTAIN_TOL):
        return self._region.contains(x, tol) and self._ball.contains(x, tol)

    def contains_batch(self, pts, tol=CONTAIN_TOL):
        return self._region.contains_batch(pts, tol) & self._ball.contains_batch(pts, tol)

    def witness(self):
        return self._ball.center


def _covering_ok(region, grid, witness, r_max, spacing, probes: int = 128):
    try:
        ps = sample(_BoundingBall(region, witness, r_max), 2_000_003, probes, r_max)
    except SamplingError:
        return True  # region thinner than sampling can see; grid kept
    table = K.cosh_dist_table(np.ascontiguousarray(ps), grid.points)
    worst = np.arccosh(np.min(table, axis=1)).max()
    return bool(worst <= spacing)


def convex_hull_samples(points, depth: int, per_level: int, seed: int) -> np.ndarray:
    """Sampled iterated geodesic combinations of a finite set.

    Level 0 is the input; level k draws ``per_level`` random pairs from
    level k-1 and a uniform t in [0, 1], emitting the interpolated point.
    Returns the union of all levels (deterministic for a fixed seed).
    """
    pts = np.ascontiguousarray(np.atleast_2d(np.asarray(points, dtype=np.float64)))
    if pts.shape[0] == 0:
        raise InputError("need at least one point")
    if depth < 0:
        raise InputError("depth must be nonnegative")
    if per_level <= 0:
        raise InputError("per_level must be positive")
    rng = np.random.default_rng(seed)
    levels = [pts]
    for _ in range(depth):
        prev = levels[-1]
        ii = rng.integers(0, prev.shape[0], size=per_level)
        jj = rng.integers(0, prev.shape[0], size=per_level)
        tt = rng.random(per_level)
        nxt = np.array([K.geodesic_point(np.ascontiguousarray(prev[i]),
                                         np.ascontiguousarray(prev[j]), float(t))
                        for i, j, t in zip(ii, jj, tt)])
        levels.append(np.ascontiguousarray(nxt))
    return np.ascontiguousarray(np.concatenate(levels, axis=0))


def region_from_descriptor(desc: dict, dim: int) -> ConvexRegion:
    """Build a region from its serialized form; see each variant's
    ``descriptor``."""
    kind = desc.get("type")
    if kind == "ball":
        return Ball(center=np.asarray(desc["center"], dtype=np.float64),
                    radius=float(desc["radius"]))
    if kind == "halfspace":
        return HalfSpace(normal=np.asarray(desc["normal"], dtype=np.float64))
    if kind == "intersection":
        return Intersection(members=tuple(
            region_from_descriptor(m, dim) for m in desc["members"]))
    if kind == "whole-space":
        return WholeSpace(dim=int(desc.get("dimension", dim)))
    raise InputError(f"unknown region type {kind!r}")
