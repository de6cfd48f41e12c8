"""Randomized, seeded property suites with machine-readable verdicts.

Each check samples its own inputs from a seed, evaluates a family of
inequalities, and reports the most negative margin ("slack") together
with a witness that reproduces it.  Nonnegative slack means the property
held on every trial; a verdict passes when worst_slack >= -tolerance.

Tolerance tiers: closed-form geometry 1e-9 (the sharpest check is the
geodesic cosh identity, which is an exact equality in this model space),
solver-in-the-loop 1e-6, grid-certified bounds scale with the grid
spacing.  Trials whose inner solve fails count as inconclusive and fail
the suite when they exceed 1% of the total.
"""

from __future__ import annotations

import json
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import _kernels as K
from . import geometry as geo
from .bifunctions import (Bifunction, CoshCombination, MaxObjective, Objective,
                          ObjectiveDiff, PenalizedDiff)
from .errors import HypequilError, InputError
from .ppa import equilibrium_residual
from .regions import Ball, ConvexRegion, PointGrid, build_grid, \
    convex_hull_samples, sample
from .resolvent import SolverOptions, _descent, resolve

GEOMETRY_TOL = 1e-9
CONVEXITY_TOL = 1e-10
SOLVER_TOL = 1e-6
MAX_INCONCLUSIVE_FRACTION = 0.01


@dataclass(frozen=True)
class PropertyVerdict:
    name: str
    trials: int
    worst_slack: float
    tolerance: float
    passed: bool
    witness: dict
    inconclusive: int = 0
    extras: dict = field(default_factory=dict)

    def to_json_line(self) -> str:
        payload = {"property": self.name, "trials": self.trials,
                   "worst_slack": self.worst_slack, "tolerance": self.tolerance,
                   "pass": self.passed, "inconclusive": self.inconclusive,
                   "witness": self.witness, "extras": self.extras}
        return json.dumps(payload, sort_keys=True)


def _threads() -> int:
    try:
        return max(1, int(os.environ.get("HYPEQUIL_THREADS", "1")))
    except ValueError:
        return 1


def _map_trials(fn, count):
    """Run trial evaluations, optionally on a thread pool; results keep
    their trial order so reductions stay deterministic."""
    n = _threads()
    if n <= 1:
        return [fn(i) for i in range(count)]
    with ThreadPoolExecutor(max_workers=n) as pool:
        return list(pool.map(fn, range(count)))


def _verdict(name, slacks, tolerance, witnesses, trials, inconclusive=0,
             extras=None):
    slacks = np.asarray(slacks, dtype=np.float64)
    if slacks.size:
        idx = int(np.argmin(slacks))
        worst = float(slacks[idx])
        witness = witnesses[idx]
    else:
        worst, witness = float("inf"), {}
    passed = worst >= -tolerance and \
        inconclusive <= MAX_INCONCLUSIVE_FRACTION * max(1, trials)
    return PropertyVerdict(name=name, trials=trials, worst_slack=worst,
                           tolerance=tolerance, passed=passed, witness=witness,
                           inconclusive=inconclusive, extras=extras or {})


# ---------------------------------------------------------------------------
# closed-form geometry checks


def _sample_triples(seed, trials, dim, radius):
    ball = Ball(center=geo.origin(dim), radius=radius)
    pts = sample(ball, seed, 3 * trials, radius)
    rng = np.random.default_rng(seed + 1)
    ts = rng.random(trials)
    xs = np.ascontiguousarray(pts[0::3])
    ys = np.ascontiguousarray(pts[1::3])
    zs = np.ascontiguousarray(pts[2::3])
    return xs, ys, zs, ts


def stewart_slack(x, y, z, t) -> float:
    """-relative error of the geodesic cosh identity at one triple."""
    worst, _ = K.stewart_worst(np.ascontiguousarray(x[None, :]),
                               np.ascontiguousarray(y[None, :]),
                               np.ascontiguousarray(z[None, :]),
                               np.asarray([t], dtype=np.float64))
    return -worst


def check_stewart(seed: int, trials: int, dim: int = 2,
                  radius: float = 3.0) -> PropertyVerdict:
    """Geodesic cosh identity: in the model space the interpolation
    inequality holds with equality, so the relative error must sit at
    rounding level."""
    if trials <= 0:
        raise InputError("trials must be positive")
    xs, ys, zs, ts = _sample_triples(seed, trials, dim, radius)
    worst, idx = K.stewart_worst(xs, ys, zs, np.ascontiguousarray(ts))
    witness = {"x": geo.point_to_list(xs[idx]), "y": geo.point_to_list(ys[idx]),
               "z": geo.point_to_list(zs[idx]), "t": float(ts[idx])}
    return _verdict("stewart-identity", [-worst], GEOMETRY_TOL, [witness], trials)


def cosh_convexity_slack(x, y, z, t) -> float:
    worst, _ = K.cosh_convexity_worst(np.ascontiguousarray(x[None, :]),
                                      np.ascontiguousarray(y[None, :]),
                                      np.ascontiguousarray(z[None, :]),
                                      np.asarray([t], dtype=np.float64))
    return worst


def check_cosh_convexity(seed: int, trials: int, dim: int = 2,
                         radius: float = 3.0) -> PropertyVerdict:
    """t cosh d(x,z) + (1-t) cosh d(y,z) dominates cosh d(blend, z)."""
    if trials <= 0:
        raise InputError("trials must be positive")
    xs, ys, zs, ts = _sample_triples(seed, trials, dim, radius)
    worst, idx = K.cosh_convexity_worst(xs, ys, zs, np.ascontiguousarray(ts))
    witness = {"x": geo.point_to_list(xs[idx]), "y": geo.point_to_list(ys[idx]),
               "z": geo.point_to_list(zs[idx]), "t": float(ts[idx])}
    return _verdict("cosh-convexity", [worst], CONVEXITY_TOL, [witness], trials)


# ---------------------------------------------------------------------------
# solver-in-the-loop checks


def firmly_nonspreading_slack(f, region, x1, x2, opts):
    """cosh d(x1,z2) + cosh d(x2,z1)
       - (cosh d(x1,z1) + cosh d(x2,z2)) cosh d(z1,z2)."""
    z1 = resolve(f, region, x1, opts).z
    z2 = resolve(f, region, x2, opts).z
    return (K.cosh_dist(x1, z2) + K.cosh_dist(x2, z1)
            - (K.cosh_dist(x1, z1) + K.cosh_dist(x2, z2)) * K.cosh_dist(z1, z2))


def check_firmly_nonspreading(f: Bifunction, region: ConvexRegion, seed: int,
                              trials: int, opts: SolverOptions,
                              sample_radius: float = 3.0) -> PropertyVerdict:
    """Resolved pairs satisfy the firm nonspreading inequality.

    Query points are drawn from a ball around the region witness and may
    lie outside the region (the resolvent is defined on the whole space).
    """
    pts = sample(Ball(center=region.witness(), radius=sample_radius),
                 seed, 2 * trials, sample_radius)
    x1s = pts[0::2]
    x2s = pts[1::2]

    def one(i):
        x1 = np.ascontiguousarray(x1s[i])
        x2 = np.ascontiguousarray(x2s[i])
        try:
            return firmly_nonspreading_slack(f, region, x1, x2, opts), None
        except HypequilError as exc:
            return None, str(exc)

    results = _map_trials(one, trials)
    slacks, witnesses = [], []
    inconclusive = 0
    for i, (s, err) in enumerate(results):
        if s is None:
            inconclusive += 1
            continue
        slacks.append(s)
        witnesses.append({"x1": geo.point_to_list(x1s[i]),
                          "x2": geo.point_to_list(x2s[i])})
    return _verdict("firmly-nonspreading", slacks, SOLVER_TOL, witnesses,
                    trials, inconclusive,
                    extras={"bifunction": f.descriptor()})


def check_resolvent_equivalence(f: Bifunction, region: ConvexRegion, x,
                                grid: PointGrid, opts: SolverOptions,
                                tolerance: float = 1e-5) -> PropertyVerdict:
    """At the solver output z, both inequality families hold over the grid:

    (1)  f(y, z) <= cosh d(x,y) - cosh d(x,z)        for all grid y
    (2)  0 <= f(z, y) + cosh d(x,y) - cosh d(x,z)    for all grid y

    For antisymmetric f the two coincide identically; monotonicity makes
    the form-(1) slack dominate the form-(2) slack pointwise.
    """
    x = np.ascontiguousarray(x, np.float64)
    z = resolve(f, region, x, opts).z
    gap = K.cosh_dist_rows(grid.points, x) - K.cosh_dist(x, z)
    s2 = f.row(z, grid.points) + gap
    s1 = gap - f.col(grid.points, z)
    i2 = int(np.argmin(s2))
    i1 = int(np.argmin(s1))
    if s1[i1] < s2[i2]:
        worst, idx, form = float(s1[i1]), i1, 1
    else:
        worst, idx, form = float(s2[i2]), i2, 2
    witness = {"x": geo.point_to_list(x), "z": geo.point_to_list(z),
               "y": geo.point_to_list(grid.points[idx]), "form": form}
    extras = {"worst_form1": float(s1[i1]), "worst_form2": float(s2[i2]),
              "form1_dominates_form2": bool(np.all(s1 >= s2 - 1e-12)),
              "bifunction": f.descriptor()}
    return _verdict("resolvent-equivalence", [worst], tolerance, [witness],
                    len(grid), extras=extras)


def check_fixed_point_equivalence(f: Bifunction, region: ConvexRegion,
                                  p_star, grid: PointGrid,
                                  opts: SolverOptions) -> PropertyVerdict:
    """Equilibrium points are exactly the resolvent's fixed points:
    resolving at a known equilibrium point moves it by at most 1e-6, and
    any point the resolvent fixes has grid equilibrium residual >= -1e-5.
    """
    p_star = np.ascontiguousarray(p_star, np.float64)
    z = resolve(f, region, p_star, opts).z
    move = K.dist(z, p_star)
    res = equilibrium_residual(f, region, z, grid)
    slack = min(1e-6 - move, res + 1e-5)
    witness = {"p_star": geo.point_to_list(p_star), "z": geo.point_to_list(z)}
    return _verdict("fixed-point-equivalence", [slack], 0.0, [witness], 1,
                    extras={"moved": float(move), "residual": float(res),
                            "bifunction": f.descriptor()})


# ---------------------------------------------------------------------------
# KKM cover / finite intersection


class _SignedCosh(Objective):
    """Internal: cosh-distance combination allowing negative weights.

    Convexity is the caller's responsibility (used for the penalized
    family where the certified mu bound guarantees it).
    """

    def __init__(self, anchors, weights, offset=0.0):
        self.anchors = np.ascontiguousarray(np.atleast_2d(anchors))
        self.weights = np.asarray(weights, dtype=np.float64)
        self.offset = float(offset)
        self._amb = -(self.weights[:, None] * self.anchors).sum(axis=0)

    def value(self, p):
        return float(self.weights @ K.cosh_dist_rows(self.anchors, p)) + self.offset

    def subgrad(self, p):
        return K.tangent_project(p, np.ascontiguousarray(self._amb))

    def restrict(self, z, v):
        from .bifunctions import _CoshLine
        a = float(self.weights @ K.cosh_dist_rows(self.anchors, z))
        b = float(self.weights @ -K.mink_rows(self.anchors, v))
        return _CoshLine(a, b)  # offset does not affect the line search


def _kkm_slack_objective(f, x, ys):
    """max_i h(y_i, .) as a descent objective, when f's structure allows.

    h(y, u) = f(y, u) + cosh d(x, u) - cosh d(x, y).
    """
    if isinstance(f, ObjectiveDiff):
        g = f.objective
        consts = [g.value(np.ascontiguousarray(y)) + K.cosh_dist(x, y) for y in ys]
        if isinstance(g, CoshCombination):
            base = _SignedCosh(
                np.vstack([g.anchors, x[None, :]]) if g.anchors.size else x[None, :],
                np.concatenate([g.weights, [1.0]]) if g.weights.size else [1.0],
                offset=-min(consts))
            return base
        return None  # handled by caller through the resolvent route
    if isinstance(f, PenalizedDiff):
        g = f.objective
        parts = []
        for y in ys:
            y = np.ascontiguousarray(y)
            const = g.value(y) + K.cosh_dist(x, y) - f.mu
            anchors = np.vstack([g.anchors, x[None, :], y[None, :]]) \
                if g.anchors.size else np.vstack([x[None, :], y[None, :]])
            weights = np.concatenate([g.weights, [1.0, -f.mu]]) \
                if g.weights.size else np.asarray([1.0, -f.mu])
            parts.append(_SignedCosh(anchors, weights, offset=-const))
        return MaxObjective(parts=tuple(parts))
    return None


def check_kkm_cover(f: Bifunction, x, region: ConvexRegion, family_size: int,
                    seed: int, opts: SolverOptions,
                    grid: PointGrid | None = None,
                    hull_depth: int = 3, hull_per_level: int = 64
                    ) -> PropertyVerdict:
    """Finite-intersection structure of the sets M(y) = {u : h(y,u) <= 0}.

    (a) every sampled iterated-combination point of {y_i} lands in some
        M(y_i); (b) a common point of all M(y_i) exists, located on the
        grid and sharpened by a constrained descent polish when f's
        structure admits one.
    """
    if family_size < 1:
        raise InputError("family_size must be at least 1")
    x = np.ascontiguousarray(x, np.float64)
    ys = sample(region, seed, family_size, opts.bounding_radius)
    ys = np.ascontiguousarray(ys)
    cy = np.array([K.cosh_dist(x, np.ascontiguousarray(y)) for y in ys])

    # (a) hull coverage: exact up to rounding, tolerance 1e-8
    hull = convex_hull_samples(ys, depth=hull_depth, per_level=hull_per_level,
                               seed=seed + 1)
    hv = _h_table(f, x, ys, cy, hull)
    cover_gaps = hv.min(axis=0)
    ci = int(np.argmax(cover_gaps))
    cover_slack = -float(cover_gaps[ci])

    # (b) common point of all M(y_i)
    if grid is None:
        grid = build_grid(region, opts.grid_spacing, opts.bounding_radius,
                          phase_seed=seed)
    gv = _h_table(f, x, ys, cy, grid.points)
    common = gv.max(axis=0)
    gi = int(np.argmin(common))
    grid_best = float(common[gi])
    point_best = grid_best
    best_pt = grid.points[gi]
    obj = _kkm_slack_objective(f, x, ys)
    if obj is None and isinstance(f, ObjectiveDiff):
        z, _ = _descent(f.objective, region, x, opts)
        val = float(_h_table(f, x, ys, cy, z[None, :]).max())
        if val < point_best:
            point_best, best_pt = val, z
    elif obj is not None:
        z, _ = _descent(obj, region, None, opts, start=np.ascontiguousarray(best_pt))
        val = float(_h_table(f, x, ys, cy, z[None, :]).max())
        if val < point_best:
            point_best, best_pt = val, z
    inter_slack = -point_best

    worst = min(cover_slack, inter_slack)
    witness = {"x": geo.point_to_list(x),
               "family": [geo.point_to_list(y) for y in ys],
               "hull_worst": geo.point_to_list(hull[ci]),
               "common_point": geo.point_to_list(best_pt)}
    extras = {"cover_slack": cover_slack, "intersection_slack": inter_slack,
              "grid_intersection_value": grid_best,
              "bifunction": f.descriptor()}
    return _verdict("kkm-cover", [worst], SOLVER_TOL, [witness],
                    len(hull) + len(grid), extras=extras)


def _h_table(f, x, ys, cy, pts):
    """h(y_i, u) over rows u of pts, for each family member y_i."""
    pts = np.ascontiguousarray(pts)
    cx = K.cosh_dist_rows(pts, x)
    rows = []
    for y, c in zip(ys, cy):
        y = np.ascontiguousarray(y)
        rows.append(f.row(y, pts) + cx - c)
    return np.stack(rows)


# ---------------------------------------------------------------------------
# witness replay


def replay_slack(verdict: PropertyVerdict, f: Bifunction | None = None,
                 region: ConvexRegion | None = None,
                 opts: SolverOptions | None = None) -> float:
    """Recompute the recorded worst slack from the verdict's witness."""
    w = verdict.witness
    name = verdict.name
    if name == "stewart-identity":
        return stewart_slack(np.asarray(w["x"]), np.asarray(w["y"]),
                             np.asarray(w["z"]), w["t"])
    if name == "cosh-convexity":
        return cosh_convexity_slack(np.asarray(w["x"]), np.asarray(w["y"]),
                                    np.asarray(w["z"]), w["t"])
    if name == "firmly-nonspreading":
        return firmly_nonspreading_slack(
            f, region, np.ascontiguousarray(np.asarray(w["x1"])),
            np.ascontiguousarray(np.asarray(w["x2"])), opts)
    raise InputError(f"no replay rule for property {name!r}")
