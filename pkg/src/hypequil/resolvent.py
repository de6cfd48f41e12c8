"""Resolvent solves for equilibrium bifunctions.

The resolvent of f at x is the unique z in K with

    f(z, y) + cosh d(x, y) - cosh d(x, z) >= 0   for every y in K.

Three routes compute it:

* ``resolve_optimization`` - projected Riemannian descent for
  optimization-type bifunctions f(x,y) = g(y) - g(x), where the resolvent
  is argmin_K g + cosh d(x, .).  Steps use exact 1-D minimization along
  geodesics (cosh-sum restrictions are A cosh t + B sinh t, minimized in
  closed form; other catalog terms by derivative bisection), with
  min-norm subgradient combinations at nonsmooth points.
* ``resolve_general`` - multiresolution merit-grid search for arbitrary
  monotone bifunctions on a bounded region, followed by a descent polish
  whenever the bifunction advertises an equivalent objective.
* ``oracle_resolve`` - exhaustive argmax-min scan over a finite grid; the
  independent brute-force oracle the other two are tested against.

Every solve ends with a grid certificate: the merit (negated infimum of
the defining expression) over a covering grid must stay below
tol + C * spacing, where C is the observed Lipschitz bound of the merit
integrand on that grid.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import _kernels as K
from . import geometry as geo
from .bifunctions import (Bifunction, Objective, ObjectiveDiff,
                          PenalizedDiff, _CoshLine, _SumLine,
                          objective_from_descriptor)
from .errors import ConvergenceError, InputError, NoCertificateError
from .regions import Ball, ConvexRegion, PointGrid, build_grid


@dataclass(frozen=True)
class SolverOptions:
    tol: float = 1e-8
    max_iters: int = 10_000
    grid_spacing: float = 0.05
    bounding_radius: float = 6.0
    seed: int = 0
    certification_grid: PointGrid | None = field(default=None, repr=False)

    def __post_init__(self):
        if self.tol <= 0 or self.grid_spacing <= 0 or self.max_iters <= 0:
            raise InputError("tol, grid_spacing and max_iters must be positive")
        if self.bounding_radius is not None and self.bounding_radius <= 0:
            raise InputError("bounding radius must be positive")


@dataclass(frozen=True, eq=False)
class ResolventOutcome:
    z: np.ndarray
    merit_value: float
    iterations: int
    solver: str

    def to_dict(self):
        return {"z": geo.point_to_list(self.z), "merit": float(self.merit_value),
                "iterations": int(self.iterations), "solver": self.solver}


def rho(t: float) -> float:
    """t / sinh t, by series below 1e-4 where the ratio loses digits."""
    if t < 0:
        raise InputError("rho needs a nonnegative argument")
    if t < 1e-4:
        t2 = t * t
        return 1.0 - t2 / 6.0 + 7.0 * t2 * t2 / 360.0
    return t / np.sinh(t)


def merit(f: Bifunction, x: np.ndarray, z: np.ndarray, grid: PointGrid) -> float:
    """max over grid y of -(f(z,y) + cosh d(x,y) - cosh d(x,z)).

    Nonpositive merit certifies z as a grid-level resolvent of f at x;
    merit is >= 0 whenever z itself belongs to the grid.
    """
    m, _ = merit_with_lipschitz(f, x, z, grid)
    return m


def merit_with_lipschitz(f, x, z, grid):
    """Merit plus the observed Lipschitz bound of its integrand on the grid."""
    pts = grid.points
    if pts.shape[0] == 0:
        raise InputError("empty grid")
    x = np.ascontiguousarray(x, np.float64)
    z = np.ascontiguousarray(z, np.float64)
    h = f.row(z, pts) + K.cosh_dist_rows(pts, x) - K.cosh_dist(x, z)
    gaps = np.abs(np.diff(h))
    seps = np.arccosh(np.maximum(
        1.0, -(np.einsum("ij,ij->i", pts[:-1, 1:], pts[1:, 1:])
               - pts[:-1, 0] * pts[1:, 0])))
    near = (seps > 1e-12) & (seps <= 2.0 * grid.spacing)
    lip = float(np.max(gaps[near] / seps[near])) if near.any() else 1.0
    return float(-np.min(h)), lip


# ---------------------------------------------------------------------------
# descent core


def _min_norm_combo(grads):
    """Minimal-norm point of the convex hull of tangent gradients.

    Exact for one or two gradients; more are folded in pairwise, which is
    sufficient for the catalog's two-part max objectives.
    """
    v = grads[0]
    for u in grads[1:]:
        duv = v - u
        den = float((duv[1:] ** 2).sum() - duv[0] ** 2)
        if den <= 1e-300:
            continue
        num = float((duv[1:] * v[1:]).sum() - duv[0] * v[0])
        theta = min(1.0, max(0.0, num / den))
        v = v - theta * duv
    nrm2 = float((v[1:] ** 2).sum() - v[0] ** 2)
    return v, float(np.sqrt(max(0.0, nrm2)))


def _line_minimize(phi, max_t: float = 50.0) -> float:
    """Minimizer of a convex 1-D restriction with phi'(0) < 0."""
    exact = phi.exact_min() if isinstance(phi, _CoshLine) else None
    if exact is not None:
        return max(0.0, exact)
    if isinstance(phi, _SumLine) and all(isinstance(p, _CoshLine) for p in phi.parts):
        a = sum(p.a for p in phi.parts)
        b = sum(p.b for p in phi.parts)
        exact = _CoshLine(a, b).exact_min()
        if exact is not None:
            return max(0.0, exact)
        return 0.0
    lo, hi = 0.0, 1.0
    steps = 0
    while phi.deriv(hi) < 0.0:
        lo, hi = hi, 2.0 * hi
        steps += 1
        if hi > max_t or steps > 60:
            return hi
    for _ in range(100):
        mid = 0.5 * (lo + hi)
        if phi.deriv(mid) < 0.0:
            lo = mid
        else:
            hi = mid
        if hi - lo < 1e-15 * max(1.0, hi):
            break
    return 0.5 * (lo + hi)


def _prox_line(x, z, v):
    """Restriction of cosh d(x, .) along t -> exp_z(t v)."""
    return _CoshLine(K.cosh_dist(x, z), -K.mink(np.ascontiguousarray(x), v))


def _descent(g: Objective, region: ConvexRegion, x: np.ndarray | None,
             opts: SolverOptions, start: np.ndarray | None = None):
    """Minimize g + cosh d(x, .) over the region (just g when x is None).

    Returns (z, iterations).  Raises ConvergenceError past max_iters.
    """
    if start is not None:
        z = np.ascontiguousarray(region.project(np.ascontiguousarray(start)))
    elif x is not None:
        z = np.ascontiguousarray(region.project(x))
    else:
        z = np.ascontiguousarray(region.witness())
    active_eps = 1e-9
    for it in range(opts.max_iters):
        scale = max(1.0, abs(g.value(z)))
        if x is not None:
            prox_grad = K.tangent_project(z, np.ascontiguousarray(-x))
            scale = max(scale, K.cosh_dist(x, z))
        else:
            prox_grad = np.zeros_like(z)
        grads = [np.asarray(gi) + prox_grad
                 for gi in g.active_grads(z, active_eps * scale)]
        v, gnorm = _min_norm_combo(grads)
        if gnorm < opts.tol:
            return z, it
        direction = -v / gnorm
        parts = [g.restrict(z, np.ascontiguousarray(direction))]
        if x is not None:
            parts.append(_prox_line(x, z, np.ascontiguousarray(direction)))
        phi = _SumLine(parts)
        if phi.deriv(0.0) >= 0.0:
            # stationary along the steepest direction (kink landed on)
            if active_eps < 1e-4:
                active_eps *= 100.0  # widen the active set once before stopping
                continue
            return z, it
        t_star = _line_minimize(phi)
        if t_star <= 0.0:
            return z, it
        step = K.exp_map(z, np.ascontiguousarray(t_star * direction), t_star)
        z_new = np.ascontiguousarray(region.project(step))
        # ambient-chord displacement: arccosh of near-identical points has a
        # sqrt(eps) noise floor, so the metric distance cannot gauge
        # convergence below ~1e-7
        disp = float(np.max(np.abs(z - z_new))) / max(1.0, z[0])
        z = z_new
        if disp < opts.tol:
            return z, it + 1
    raise ConvergenceError(
        f"descent did not converge in {opts.max_iters} iterations",
        best=z)


def _certification_grid(region, opts):
    if opts.certification_grid is not None:
        return opts.certification_grid
    return build_grid(region, opts.grid_spacing, opts.bounding_radius,
                      phase_seed=opts.seed)


def _certify(f, region, x, z, iterations, solver, opts):
    grid = _certification_grid(region, opts)
    m, lip = merit_with_lipschitz(f, x, z, grid)
    allowance = opts.tol + lip * opts.grid_spacing
    outcome = ResolventOutcome(z=z, merit_value=m, iterations=iterations,
                               solver=solver)
    if m > allowance:
        raise NoCertificateError(
            f"merit {m:.3e} exceeds allowance {allowance:.3e} "
            f"(Lipschitz bound {lip:.3e}); insufficient resolution or an "
            "invalid bifunction", best=outcome, merit=m, allowance=allowance)
    return outcome


def resolve_optimization(g, region: ConvexRegion, x, opts: SolverOptions
                         ) -> ResolventOutcome:
    """Resolvent of f(x,y) = g(y) - g(x): argmin over K of g + cosh d(x, .)."""
    if isinstance(g, dict):
        g = objective_from_descriptor(g)
    z, iters = _descent(g, region, np.ascontiguousarray(x, np.float64), opts)
    return _certify(ObjectiveDiff(objective=g), region, x, z, iters,
                    "descent", opts)


def minimize_objective(g: Objective, region: ConvexRegion,
                       opts: SolverOptions | None = None,
                       start=None) -> np.ndarray:
    """Constrained minimizer of g alone (no proximal term).

    Used to construct known equilibrium points: for optimization-type
    bifunctions the equilibrium set is exactly argmin_K g.
    """
    opts = opts or SolverOptions()
    z, _ = _descent(g, region, None, opts,
                    start=None if start is None else np.asarray(start, np.float64))
    return z


def resolve_general(f: Bifunction, region: ConvexRegion, x,
                    opts: SolverOptions) -> ResolventOutcome:
    """Multiresolution merit-grid resolvent for a general monotone f.

    Builds full-region grids at halving spacings down to
    ``opts.grid_spacing``, recentering each finer level on the best
    candidate so far with radius three times the previous spacing.  When
    the bifunction advertises a reduction objective the final candidate is
    polished by descent.  The certificate always scores the true f over
    the finest full-region grid.
    """
    if opts.bounding_radius is None:
        raise InputError("general solves need a bounding radius")
    x = np.ascontiguousarray(x, np.float64)
    spacing = opts.grid_spacing
    levels = max(0, int(np.ceil(np.log2(opts.bounding_radius / (4.0 * spacing)))))
    ladder = [spacing * 2.0 ** k for k in range(levels, 0, -1)] + [spacing]

    evals = 0
    coarse = build_grid(region, ladder[0], opts.bounding_radius,
                        phase_seed=opts.seed)
    z, n = _best_candidate(f, x, coarse, coarse)
    evals += n
    prev_spacing = ladder[0]
    for s in ladder[1:]:
        patch = build_grid(Ball(center=z, radius=3.0 * prev_spacing), s,
                           3.0 * prev_spacing, phase_seed=opts.seed + 1)
        mask = region.contains_batch(patch.points, 1e-9)
        pts = np.ascontiguousarray(np.vstack([z[None, :], patch.points[mask]]))
        local = PointGrid(points=pts, spacing=s)
        z, n = _best_candidate(f, x, local, local)
        evals += n
        prev_spacing = s

    g = f.reduction()
    if g is not None:
        z, extra = _descent(g, region, x, opts)
        evals += extra
    return _certify(f, region, x, z, evals, "merit-grid", opts)


def _best_candidate(f, x, candidates: PointGrid, grid: PointGrid):
    """Candidate minimizing the merit over the grid; lowest index on ties."""
    pts = candidates.points
    cx = K.cosh_dist_rows(grid.points, x)
    best_idx, best_merit = 0, np.inf
    for i in range(pts.shape[0]):
        z = np.ascontiguousarray(pts[i])
        h = f.row(z, grid.points) + cx - K.cosh_dist(x, z)
        m = float(-np.min(h))
        if m < best_merit:
            best_idx, best_merit = i, m
    return np.ascontiguousarray(pts[best_idx]), pts.shape[0]


def resolve(f: Bifunction, region: ConvexRegion, x,
            opts: SolverOptions) -> ResolventOutcome:
    """Route to the descent solver when f has an equivalent objective,
    otherwise to the merit-grid solver; certification always uses f."""
    g = f.reduction()
    if g is None:
        return resolve_general(f, region, x, opts)
    x = np.ascontiguousarray(x, np.float64)
    z, iters = _descent(g, region, x, opts)
    return _certify(f, region, x, z, iters, "descent", opts)


def oracle_resolve(f: Bifunction, region: ConvexRegion, x,
                   grid: PointGrid) -> np.ndarray:
    """Exhaustive grid oracle: the grid point maximizing
    min over grid y of f(z,y) + cosh d(x,y) - cosh d(x,z).

    Ties break to the lowest index.  Catalog bifunction families run in
    the kernel backend; anything else falls back to a row-by-row scan.
    """
    idx, _ = oracle_index(f, x, grid)
    return np.ascontiguousarray(grid.points[idx])


def oracle_index(f: Bifunction, x, grid: PointGrid):
    pts = grid.points
    if pts.shape[0] == 0:
        raise InputError("empty grid")
    x = np.ascontiguousarray(x, np.float64)
    cx = K.cosh_dist_rows(pts, x)
    if isinstance(f, ObjectiveDiff):
        t = np.ascontiguousarray(f.objective.value_rows(pts) + cx)
        return K.oracle_scan_diff(t, t)
    if isinstance(f, PenalizedDiff):
        t = np.ascontiguousarray(f.objective.value_rows(pts) + cx)
        return K.oracle_scan_penalized(pts, t, t, f.mu)
    best_idx, best_val = 0, -np.inf
    for i in range(pts.shape[0]):
        z = np.ascontiguousarray(pts[i])
        h = f.row(z, pts) + cx - cx[i]
        v = float(np.min(h))
        if v > best_val:
            best_idx, best_val = i, v
    return best_idx, best_val


def oracle_merit_table(f: Bifunction, x, grid: PointGrid) -> np.ndarray:
    """Merit of every grid candidate against the full grid (O(N^2))."""
    pts = grid.points
    x = np.ascontiguousarray(x, np.float64)
    cx = K.cosh_dist_rows(pts, x)
    out = np.empty(pts.shape[0])
    for i in range(pts.shape[0]):
        z = np.ascontiguousarray(pts[i])
        out[i] = -float(np.min(f.row(z, pts) + cx - cx[i]))
    return out


def characterization_residual(f: Bifunction, x, z, w) -> float:
    """f(z,w) + (d/sinh d)(cosh d(x,w) - cosh d(x,z) cosh d(z,w)),
    with d = d(z,w); nonnegative for every w in K exactly when z is the
    resolvent of f at x."""
    x = np.ascontiguousarray(x, np.float64)
    z = np.ascontiguousarray(z, np.float64)
    w = np.ascontiguousarray(w, np.float64)
    d = K.dist(z, w)
    return float(f.eval(z, w) + rho(d) * (K.cosh_dist(x, w)
                                          - K.cosh_dist(x, z) * K.cosh_dist(z, w)))
