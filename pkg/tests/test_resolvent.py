"""Resolvent solvers: merit, descent, multiresolution grid search,
exhaustive oracle, and the derived characterization residual."""

import numpy as np
import pytest

from hypequil import (Ball, CallableBifunction, ConvergenceError,
                      CoshCombination, DistanceTo, InputError, MaxObjective,
                      ObjectiveDiff, PenalizedDiff, SolverOptions,
                      build_grid, certified_penalty_mu,
                      characterization_residual, dist, geodesic_point, hpoint,
                      merit, minimize_objective, oracle_resolve, origin,
                      resolve, resolve_general, resolve_optimization, sample,
                      zero_objective)
from hypequil import _kernels as K
from hypequil.regions import PointGrid
from hypequil.resolvent import oracle_index, rho

O = origin(2)
BALL = Ball(center=O, radius=2.0)
A = hpoint([np.cosh(0.8), 0, np.sinh(0.8)])
X = hpoint([np.cosh(0.9), np.sinh(0.9), 0])
X_OUT = hpoint([np.cosh(3), np.sinh(3), 0])

GRID = build_grid(BALL, 0.05, 6.0, phase_seed=0)
OPTS = SolverOptions(certification_grid=GRID)

F_ZERO = ObjectiveDiff(objective=zero_objective(2))
G_ONE = CoshCombination(anchors=np.array([A]), weights=np.array([1.0]))
F_ONE = ObjectiveDiff(objective=G_ONE)


def test_rho_series_and_direct():
    assert rho(0.0) == 1.0
    assert rho(2.0) == pytest.approx(2.0 / np.sinh(2.0), abs=1e-16)
    # series and direct evaluation agree at the switch point
    t = 1e-4
    assert rho(t * 0.999999) == pytest.approx(t / np.sinh(t), rel=1e-15)
    with pytest.raises(InputError):
        rho(-1.0)


def test_merit_zero_bifunction_basics():
    # z = x on the grid: merit exactly 0, attained at y = x
    z = np.ascontiguousarray(GRID.points[17])
    g_with_z = PointGrid(points=np.ascontiguousarray(
        np.vstack([GRID.points, z[None, :]])), spacing=GRID.spacing)
    assert merit(F_ZERO, z, z, g_with_z) == pytest.approx(0.0, abs=1e-12)
    # any grid z has merit >= 0 against a grid containing it
    z2 = np.ascontiguousarray(GRID.points[213])
    assert merit(F_ZERO, X, z2, GRID) >= -1e-12
    # z far from the projection scores positive merit
    assert merit(F_ZERO, X_OUT, z2, GRID) > 0.01


def test_merit_empty_grid_rejected():
    empty = PointGrid(points=np.zeros((0, 3)), spacing=0.1)
    with pytest.raises(InputError):
        merit(F_ZERO, X, X, empty)


def test_resolve_zero_inside_and_outside():
    out = resolve_optimization(zero_objective(2), BALL, X, OPTS)
    assert np.max(np.abs(out.z - X)) < 1e-12
    out = resolve_optimization(zero_objective(2), BALL, X_OUT, OPTS)
    assert dist(out.z, BALL.project(X_OUT)) < 1e-7
    assert out.solver == "descent"


def test_single_anchor_resolvent_is_midpoint():
    out = resolve_optimization(G_ONE, BALL, X, OPTS)
    mid = geodesic_point(A, X, 0.5)
    assert dist(out.z, mid) < 1e-6
    assert out.merit_value <= OPTS.tol + 1e-3  # certified


def test_distance_anchor_resolvent_closed_form():
    gd = DistanceTo(anchor=A, w=1.0)
    out = resolve_optimization(gd, BALL, X, OPTS)
    D = dist(X, A)
    s = np.arcsinh(1.0)
    expect = geodesic_point(X, A, 1 - s / D) if D > s else A
    assert dist(out.z, expect) < 1e-7
    # anchor absorbs the resolvent when the query is close enough
    x_near = geodesic_point(A, X, 1.0 - 0.5 / D)   # within arcsinh(1) of A
    out2 = resolve_optimization(gd, BALL, x_near, OPTS)
    assert dist(out2.z, A) < 1e-7


def test_resolvents_against_oracle_all_families():
    g3 = CoshCombination(
        anchors=np.array([A, hpoint([np.cosh(0.4), np.sinh(0.4), 0]), O]),
        weights=np.array([1.0, 0.7, 0.5]))
    gmax = MaxObjective(parts=(G_ONE, CoshCombination(
        anchors=np.array([X]), weights=np.array([0.8]))))
    fams = [F_ZERO, F_ONE, ObjectiveDiff(objective=g3),
            ObjectiveDiff(objective=DistanceTo(anchor=A)),
            ObjectiveDiff(objective=gmax),
            PenalizedDiff(objective=g3, mu=certified_penalty_mu(g3, 4.0))]
    for f in fams:
        zo = oracle_resolve(f, BALL, X, GRID)
        out = resolve(f, BALL, X, OPTS)
        assert dist(out.z, zo) <= GRID.spacing, f.descriptor()
        outg = resolve_general(f, BALL, X, OPTS)
        assert dist(outg.z, zo) <= 2 * GRID.spacing
        assert dist(outg.z, out.z) < 1e-6


def test_general_solver_without_structure_matches_grid_accuracy():
    fp = PenalizedDiff(objective=G_ONE, mu=certified_penalty_mu(G_ONE, 4.0))
    raw = CallableBifunction(fn=lambda u, v: fp.eval(u, v), name="opaque")
    truth = resolve(fp, BALL, X, OPTS).z
    out = resolve_general(raw, BALL, X, OPTS)
    assert dist(out.z, truth) <= 2 * OPTS.grid_spacing
    assert out.solver == "merit-grid"


def test_general_solver_determinism_and_phase_independence():
    fp = PenalizedDiff(objective=G_ONE, mu=certified_penalty_mu(G_ONE, 4.0))
    z1 = resolve_general(fp, BALL, X, SolverOptions(seed=1)).z
    z2 = resolve_general(fp, BALL, X, SolverOptions(seed=12345)).z
    z1b = resolve_general(fp, BALL, X, SolverOptions(seed=1)).z
    assert np.array_equal(z1, z1b)
    assert dist(z1, z2) <= OPTS.grid_spacing


def test_oracle_trivia():
    single = PointGrid(points=np.ascontiguousarray(X[None, :]), spacing=1.0)
    assert np.array_equal(oracle_resolve(F_ONE, BALL, O, single), X)
    # f == 0: nearest grid point to the query
    zo = oracle_resolve(F_ZERO, BALL, X, GRID)
    nearest = GRID.points[GRID.nearest_index(X)]
    assert np.array_equal(zo, nearest)
    with pytest.raises(InputError):
        oracle_resolve(F_ZERO, BALL, X, PointGrid(points=np.zeros((0, 3)),
                                                  spacing=1.0))


def test_oracle_point_is_simultaneous_intersection_witness():
    # at the oracle output z, h(y, z) <= tol holds for every grid y at once
    idx, attained = oracle_index(F_ONE, X, GRID)
    z = np.ascontiguousarray(GRID.points[idx])
    cx = K.cosh_dist_rows(GRID.points, X)
    h = F_ONE.col(GRID.points, z) + K.cosh_dist(X, z) - cx
    assert float(np.max(h)) <= 1e-9
    assert attained == pytest.approx(-merit(F_ONE, X, z, GRID), abs=1e-12)


def test_generic_oracle_agrees_with_kernel_paths():
    small = build_grid(BALL, 0.4, 6.0, phase_seed=5)
    fp = PenalizedDiff(objective=G_ONE, mu=0.02)
    raw = CallableBifunction(fn=lambda u, v: fp.eval(u, v), name="opaque")
    i1, v1 = oracle_index(fp, X, small)
    i2, v2 = oracle_index(raw, X, small)
    assert i1 == i2
    assert v1 == pytest.approx(v2, abs=1e-12)


def test_characterization_residual_properties():
    out = resolve(F_ONE, BALL, X, OPTS)
    # at w = z the residual collapses to f(z,z) = 0
    assert characterization_residual(F_ONE, X, out.z, out.z) == \
        pytest.approx(0.0, abs=1e-12)
    sub = GRID.points[:: 7]
    worst = min(characterization_residual(F_ONE, X, out.z,
                                          np.ascontiguousarray(w))
                for w in sub)
    assert worst >= -1e-6
    # perturbing z off the resolvent produces a negative residual somewhere
    v = K.tangent_project(out.z, np.array([0.0, 1.0, 0.0]))
    v /= np.sqrt(K.mink(v, v))
    z_perturbed = K.exp_map(out.z, 0.1 * v, 0.1)
    worst_p = min(characterization_residual(F_ONE, X, z_perturbed,
                                            np.ascontiguousarray(w))
                  for w in sub)
    assert worst_p < -1e-4


def test_minimize_objective_unconstrained_and_kink():
    g3 = CoshCombination(anchors=np.array([A, X]), weights=np.array([1.0, 1.0]))
    p = minimize_objective(g3, BALL, SolverOptions(tol=1e-12))
    gv = g3.subgrad(p)
    assert np.sqrt(max(0.0, K.mink(gv, gv))) < 1e-9
    gd = DistanceTo(anchor=A)
    p2 = minimize_objective(gd, BALL, SolverOptions(tol=1e-12))
    assert dist(p2, A) < 1e-9


def test_descent_convergence_error_carries_best():
    g3 = CoshCombination(anchors=np.array([A, X]), weights=np.array([1.0, 1.0]))
    with pytest.raises(ConvergenceError) as err:
        resolve_optimization(g3, BALL, X_OUT, SolverOptions(max_iters=1))
    assert err.value.best is not None


def test_outcome_serialization():
    out = resolve(F_ONE, BALL, X, OPTS)
    d = out.to_dict()
    assert set(d) == {"z", "merit", "iterations", "solver"}
    assert isinstance(d["z"], list) and len(d["z"]) == 3


def test_general_solver_returns_grid_query_point_for_zero_bifunction():
    # x itself on the grid and f == 0: the resolvent is x with merit 0
    x = np.ascontiguousarray(GRID.points[321])
    out = resolve_general(F_ZERO, BALL, x, OPTS)
    assert np.max(np.abs(out.z - x)) < 1e-12
    assert merit(F_ZERO, x, out.z, GRID) == pytest.approx(0.0, abs=1e-12)


def test_quasinonexpansive_at_fixed_point():
    # d(L_f x, z*) <= d(x, z*) for the equilibrium point z* = argmin g
    z_star = minimize_objective(G_ONE, BALL, SolverOptions(tol=1e-12))
    queries = sample(Ball(center=O, radius=3.0), 23, 60, 3.0)
    for q in queries:
        q = np.ascontiguousarray(q)
        z = resolve(F_ONE, BALL, q, OPTS).z
        assert dist(z, z_star) <= dist(q, z_star) + 1e-6


def test_plain_hyperbolic_nonspreading_follows():
    # 2 cosh d(z1,z2) <= cosh d(x1,z2) + cosh d(x2,z1) on random pairs
    pts = sample(Ball(center=O, radius=3.0), 29, 60, 3.0)
    for i in range(0, 60, 2):
        x1 = np.ascontiguousarray(pts[i])
        x2 = np.ascontiguousarray(pts[i + 1])
        z1 = resolve(F_ONE, BALL, x1, OPTS).z
        z2 = resolve(F_ONE, BALL, x2, OPTS).z
        lhs = 2.0 * K.cosh_dist(z1, z2)
        rhs = K.cosh_dist(x1, z2) + K.cosh_dist(x2, z1)
        assert lhs <= rhs + 1e-6
