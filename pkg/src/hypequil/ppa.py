"""Proximal point iteration x_{k+1} = resolvent of (lambda_k f) at x_k.

Convergence here is observed, not certified: the driver halts on a metric
criterion d(x_k, x_{k+1}) < stop_tol and records per-step diagnostics.
Positive scaling of f preserves all four bifunction conditions, so the
lambda schedule is a safe way to vary regularization strength.
"""

from __future__ import annotations

import itertools
import time
from dataclasses import dataclass

import numpy as np

from . import _kernels as K
from . import geometry as geo
from .bifunctions import Bifunction, scale_bifunction
from .errors import HypequilError, InputError
from .regions import ConvexRegion, PointGrid, build_grid
from .resolvent import SolverOptions, resolve


def constant_schedule(value: float):
    if value <= 0:
        raise InputError("lambda must be positive")
    return itertools.repeat(float(value))


def geometric_schedule(initial: float, ratio: float):
    if initial <= 0 or ratio <= 0:
        raise InputError("geometric schedule needs positive initial and ratio")

    def gen():
        lam = initial
        while True:
            yield lam
            lam *= ratio
    return gen()


@dataclass(frozen=True, eq=False)
class IterTrace:
    """Record of a proximal point run.

    The per-step lists all have one entry per completed step; the starting
    point is kept separately in ``start``.
    """

    start: np.ndarray
    start_residual: float
    iterates: list
    residuals: list
    step_distances: list
    lambdas: list
    micros: list
    status: str

    def __len__(self):
        return len(self.iterates)

    @property
    def final(self) -> np.ndarray:
        return self.iterates[-1] if self.iterates else self.start

    def to_csv_text(self) -> str:
        """CSV with a step-0 row for the start; floats at 17 significant
        digits so parsing the file reproduces the doubles exactly."""
        dim = self.start.shape[0]
        cols = ["step"] + [f"coord_{i}" for i in range(dim)] + \
            ["step_distance", "residual", "lambda", "micros"]
        fmt = lambda v: format(float(v), ".17g")
        lines = [",".join(cols)]
        lines.append(",".join(
            ["0"] + [fmt(c) for c in self.start]
            + [fmt(0.0), fmt(self.start_residual), fmt(0.0), "0"]))
        for k, (p, r, d, lam, us) in enumerate(zip(
                self.iterates, self.residuals, self.step_distances,
                self.lambdas, self.micros), start=1):
            lines.append(",".join(
                [str(k)] + [fmt(c) for c in p]
                + [fmt(d), fmt(r), fmt(lam), str(int(us))]))
        return "\n".join(lines) + "\n"


def equilibrium_residual(f: Bifunction, region: ConvexRegion, z,
                         grid: PointGrid) -> float:
    """min over grid y of f(z, y); >= -tol certifies z as a grid-level
    equilibrium point."""
    if len(grid) == 0:
        raise InputError("empty grid")
    z = np.ascontiguousarray(z, np.float64)
    if not region.contains(z, 1e-8):
        raise InputError("z lies outside the region")
    return float(np.min(f.row(z, grid.points)))


def run_ppa(f: Bifunction, region: ConvexRegion, x0, lambdas,
            stop_tol: float, max_steps: int,
            opts: SolverOptions | None = None,
            residual_grid: PointGrid | None = None) -> IterTrace:
    """Iterate the resolvent of lambda_k f from x0.

    ``lambdas`` is any iterable of positive reals (see the schedule
    helpers).  Halts when the step distance drops below ``stop_tol`` or
    after ``max_steps``; an inner solver failure truncates the trace with
    an error status instead of raising.
    """
    if stop_tol <= 0:
        raise InputError("stop_tol must be positive")
    if max_steps <= 0:
        raise InputError("max_steps must be positive")
    opts = opts or SolverOptions()
    x = np.ascontiguousarray(geo.check_point(np.asarray(x0, dtype=np.float64), "x0"))
    grid = residual_grid or opts.certification_grid
    if grid is None:
        grid = build_grid(region, opts.grid_spacing, opts.bounding_radius,
                          phase_seed=opts.seed)
    if opts.certification_grid is None:
        opts = SolverOptions(tol=opts.tol, max_iters=opts.max_iters,
                             grid_spacing=opts.grid_spacing,
                             bounding_radius=opts.bounding_radius,
                             seed=opts.seed, certification_grid=grid)

    iterates, residuals, steps, lams, micros = [], [], [], [], []
    status = "max_steps"
    start = x
    start_res = float(np.min(f.row(x, grid.points))) if region.contains(x, 1e-8) \
        else float("nan")
    for k, lam in enumerate(lambdas):
        if k >= max_steps:
            break
        if lam <= 0:
            raise InputError(f"lambda at step {k} must be positive, got {lam}")
        t0 = time.perf_counter_ns()
        try:
            out = resolve(scale_bifunction(f, float(lam)), region, x, opts)
        except HypequilError as exc:
            status = f"solver_error: {exc}"
            break
        us = (time.perf_counter_ns() - t0) // 1000
        x_next = out.z
        d = K.dist(x, x_next)
        iterates.append(x_next)
        residuals.append(equilibrium_residual(f, region, x_next, grid))
        steps.append(d)
        lams.append(float(lam))
        micros.append(int(us))
        x = x_next
        if d < stop_tol:
            status = "converged"
            break
    return IterTrace(start=start, start_residual=start_res, iterates=iterates,
                     residuals=residuals, step_distances=steps, lambdas=lams,
                     micros=micros, status=status)
