"""Property harness: verdict mechanics, reproducibility, and the
individual checks at small trial counts."""

import json
import os
import subprocess
import sys

import numpy as np
import pytest

from hypequil import (Ball, CoshCombination, ObjectiveDiff, PenalizedDiff,
                      SolverOptions, build_grid, certified_penalty_mu,
                      check_cosh_convexity, check_firmly_nonspreading,
                      check_fixed_point_equivalence, check_kkm_cover,
                      check_resolvent_equivalence, check_stewart, hpoint,
                      minimize_objective, origin, replay_slack, zero_objective)

O = origin(2)
BALL = Ball(center=O, radius=2.0)
GRID = build_grid(BALL, 0.05, 6.0, phase_seed=0)
OPTS = SolverOptions(certification_grid=GRID)
A = hpoint([np.cosh(0.8), 0, np.sinh(0.8)])
X = hpoint([np.cosh(0.9), np.sinh(0.9), 0])
G1 = CoshCombination(anchors=np.array([A]), weights=np.array([1.0]))
F1 = ObjectiveDiff(objective=G1)


def test_stewart_sharp_identity():
    v = check_stewart(seed=3, trials=2000)
    assert v.passed
    assert v.worst_slack >= -1e-12   # exact identity, rounding only
    assert v.trials == 2000


def test_stewart_seed_reproducibility():
    v1 = check_stewart(seed=5, trials=500)
    v2 = check_stewart(seed=5, trials=500)
    assert v1.to_json_line() == v2.to_json_line()
    v3 = check_stewart(seed=6, trials=500)
    assert v3.witness != v1.witness


def test_witness_replay_matches_recorded_slack():
    for v in [check_stewart(seed=7, trials=1000),
              check_cosh_convexity(seed=8, trials=1000)]:
        assert abs(replay_slack(v) - v.worst_slack) <= 1e-12


def test_cosh_convexity_nonnegative_slack():
    v = check_cosh_convexity(seed=9, trials=2000)
    assert v.passed
    assert v.worst_slack >= -1e-10


def test_firmly_nonspreading_with_solver_in_loop():
    v = check_firmly_nonspreading(F1, BALL, seed=11, trials=40, opts=OPTS)
    assert v.passed
    assert v.inconclusive == 0
    assert v.worst_slack >= -1e-6
    rep = replay_slack(v, f=F1, region=BALL, opts=OPTS)
    assert abs(rep - v.worst_slack) <= 1e-12


def test_firmly_nonspreading_equal_queries_zero_slack():
    from hypequil.harness import firmly_nonspreading_slack
    s = firmly_nonspreading_slack(F1, BALL, X, X, OPTS)
    assert s == pytest.approx(0.0, abs=1e-9)


def test_resolvent_equivalence_antisymmetric_forms_coincide():
    v = check_resolvent_equivalence(F1, BALL, X, GRID, OPTS)
    assert v.passed
    assert v.extras["worst_form1"] == pytest.approx(v.extras["worst_form2"],
                                                    abs=1e-10)


def test_resolvent_equivalence_penalized_gap():
    fp = PenalizedDiff(objective=G1, mu=certified_penalty_mu(G1, 4.0))
    v = check_resolvent_equivalence(fp, BALL, X, GRID, OPTS)
    assert v.passed
    assert v.extras["form1_dominates_form2"]
    # strict monotonicity opens a genuine gap between the two families
    assert v.extras["worst_form1"] > v.extras["worst_form2"] + 1e-6


def test_fixed_point_equivalence():
    p_star = minimize_objective(G1, BALL, SolverOptions(tol=1e-12))
    v = check_fixed_point_equivalence(F1, BALL, p_star, GRID, OPTS)
    assert v.passed
    assert v.extras["moved"] <= 1e-6
    assert v.extras["residual"] >= -1e-5


def test_kkm_cover_families():
    for f, seed in [(F1, 21),
                    (PenalizedDiff(objective=G1,
                                   mu=certified_penalty_mu(G1, 4.0)), 22),
                    (ObjectiveDiff(objective=zero_objective(2)), 23)]:
        v = check_kkm_cover(f, X, BALL, family_size=6, seed=seed, opts=OPTS,
                            grid=GRID)
        assert v.passed, (f.descriptor(), v.worst_slack)
        assert v.extras["cover_slack"] >= -1e-8
        assert v.extras["intersection_slack"] >= -1e-6


def test_kkm_single_member_contains_itself():
    v = check_kkm_cover(F1, X, BALL, family_size=1, seed=31, opts=OPTS,
                        grid=GRID)
    assert v.passed


def test_verdict_json_shape():
    v = check_stewart(seed=1, trials=100)
    payload = json.loads(v.to_json_line())
    assert set(payload) == {"property", "trials", "worst_slack", "tolerance",
                            "pass", "inconclusive", "witness", "extras"}
    assert payload["property"] == "stewart-identity"
    assert payload["pass"] is True


def test_thread_env_keeps_results_identical():
    env = dict(os.environ, HYPEQUIL_THREADS="4")
    code = (
        "import numpy as np\n"
        "from hypequil import *\n"
        "ball = Ball(center=origin(2), radius=2.0)\n"
        "grid = build_grid(ball, 0.1, 6.0)\n"
        "opts = SolverOptions(certification_grid=grid, grid_spacing=0.1)\n"
        "g = CoshCombination(anchors=np.array([origin(2)]),"
        " weights=np.array([1.0]))\n"
        "v = check_firmly_nonspreading(ObjectiveDiff(objective=g), ball,"
        " seed=2, trials=24, opts=opts)\n"
        "print(v.to_json_line())\n")
    one = subprocess.run([sys.executable, "-c", code], capture_output=True,
                         text=True, env=dict(os.environ, HYPEQUIL_THREADS="1"))
    four = subprocess.run([sys.executable, "-c", code], capture_output=True,
                          text=True, env=env)
    assert one.returncode == 0 and four.returncode == 0, four.stderr
    assert one.stdout == four.stdout
