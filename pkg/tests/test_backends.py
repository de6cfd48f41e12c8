"""Native-versus-fallback kernel parity.

The compiled extension and the NumPy module implement one API; these
tests pin their numerical agreement and the pure-mode escape hatch.
"""

import os
import subprocess
import sys

import numpy as np
import pytest

from hypequil import _kernels as K
from hypequil._kernels import _fallback as F

try:
    from hypequil._kernels import _native as N
except ImportError:
    N = None

needs_native = pytest.mark.skipif(N is None, reason="native kernels not built")


def rand_points(rng, m, dim=2, radius=3.0):
    base = np.zeros(dim + 1)
    base[0] = 1.0
    g = rng.standard_normal((m, dim + 1))
    g[:, 0] = 0.0
    g /= np.linalg.norm(g[:, 1:], axis=1)[:, None]
    return F.batch_exp_map(base, np.ascontiguousarray(g), radius * rng.random(m))


@needs_native
def test_scalar_ops_agree():
    rng = np.random.default_rng(0)
    pts = rand_points(rng, 60)
    for i in range(0, 60, 2):
        x, y = np.ascontiguousarray(pts[i]), np.ascontiguousarray(pts[i + 1])
        assert N.mink(x, y) == pytest.approx(F.mink(x, y), rel=1e-14, abs=1e-14)
        assert N.dist(x, y) == pytest.approx(F.dist(x, y), rel=1e-13, abs=1e-13)
        assert np.allclose(N.geodesic_point(x, y, 0.37),
                           F.geodesic_point(x, y, 0.37), atol=1e-13)
        assert np.allclose(N.log_map(x, y), F.log_map(x, y), atol=1e-12)
        v = F.log_map(x, y)
        nrm = float(np.sqrt(max(0.0, F.mink(v, v))))
        assert np.allclose(N.exp_map(x, v, nrm), F.exp_map(x, v, nrm),
                           atol=1e-12)


@needs_native
def test_dist_snap_agrees():
    rng = np.random.default_rng(1)
    x = np.ascontiguousarray(rand_points(rng, 1, radius=5.0)[0])
    y = x + 1e-10
    y = np.ascontiguousarray(y)
    assert N.dist(x, y) == 0.0 == F.dist(x, y)


@needs_native
def test_batch_tables_and_rows_agree():
    rng = np.random.default_rng(2)
    a = np.ascontiguousarray(rand_points(rng, 40))
    b = np.ascontiguousarray(rand_points(rng, 30))
    assert np.allclose(N.cosh_dist_table(a, b), F.cosh_dist_table(a, b),
                       rtol=1e-13)
    q = np.ascontiguousarray(b[0])
    assert np.allclose(N.cosh_dist_rows(a, q), F.cosh_dist_rows(a, q),
                       rtol=1e-13)
    assert np.allclose(N.dist_rows(a, q), F.dist_rows(a, q), atol=1e-13)
    assert np.allclose(N.mink_rows(a, q), F.mink_rows(a, q), rtol=1e-13)


@needs_native
def test_property_kernels_agree():
    rng = np.random.default_rng(3)
    xs = np.ascontiguousarray(rand_points(rng, 500))
    ys = np.ascontiguousarray(rand_points(rng, 500))
    zs = np.ascontiguousarray(rand_points(rng, 500))
    ts = rng.random(500)
    wn, _ = N.stewart_worst(xs, ys, zs, ts)
    wf, _ = F.stewart_worst(xs, ys, zs, ts)
    assert wn < 1e-12 and wf < 1e-12
    sn, ni = N.cosh_convexity_worst(xs, ys, zs, ts)
    sf, fi = F.cosh_convexity_worst(xs, ys, zs, ts)
    assert ni == fi
    assert sn == pytest.approx(sf, rel=1e-10, abs=1e-13)


@needs_native
def test_oracle_kernels_agree():
    rng = np.random.default_rng(4)
    pts = np.ascontiguousarray(rand_points(rng, 800))
    t = rng.random(800)
    f = rng.random(800)
    assert N.oracle_scan_diff(t, f) == F.oracle_scan_diff(t, f)
    for mu in (0.0, 0.03, 0.5):
        i_n, v_n = N.oracle_scan_penalized(pts, t, f, mu)
        i_f, v_f = F.oracle_scan_penalized(pts, t, f, mu)
        assert i_n == i_f
        assert v_n == pytest.approx(v_f, rel=1e-12, abs=1e-12)


@needs_native
def test_batch_exp_map_agrees():
    rng = np.random.default_rng(5)
    base = np.zeros(3)
    base[0] = 1.0
    dirs = rng.standard_normal((50, 3))
    dirs[:, 0] = 0.0
    dirs /= np.linalg.norm(dirs[:, 1:], axis=1)[:, None]
    radii = 3.0 * rng.random(50)
    assert np.allclose(N.batch_exp_map(base, np.ascontiguousarray(dirs), radii),
                       F.batch_exp_map(base, np.ascontiguousarray(dirs), radii),
                       atol=1e-13)


def test_pure_env_var_selects_fallback():
    code = ("import hypequil\n"
            "print(hypequil.BACKEND_NAME)\n")
    out = subprocess.run([sys.executable, "-c", code], capture_output=True,
                         text=True,
                         env=dict(os.environ, HYPEQUIL_PURE="1"))
    assert out.returncode == 0, out.stderr
    assert out.stdout.strip() == "numpy"


def test_fallback_passes_geometry_smoke():
    code = (
        "import os\n"
        "assert os.environ['HYPEQUIL_PURE'] == '1'\n"
        "import numpy as np\n"
        "from hypequil import *\n"
        "from hypequil import BACKEND_NAME\n"
        "assert BACKEND_NAME == 'numpy'\n"
        "o = origin(2)\n"
        "ball = Ball(center=o, radius=2.0)\n"
        "g = CoshCombination(anchors=np.array([o]), weights=np.array([1.0]))\n"
        "grid = build_grid(ball, 0.1, 6.0)\n"
        "opts = SolverOptions(certification_grid=grid, grid_spacing=0.1)\n"
        "x = hpoint([np.cosh(0.9), np.sinh(0.9), 0])\n"
        "out = resolve(ObjectiveDiff(objective=g), ball, x, opts)\n"
        "zo = oracle_resolve(ObjectiveDiff(objective=g), ball, x, grid)\n"
        "assert dist(out.z, zo) <= 0.1\n"
        "v = check_stewart(seed=1, trials=500)\n"
        "assert v.passed\n"
        "print('ok')\n")
    out = subprocess.run([sys.executable, "-c", code], capture_output=True,
                         text=True, env=dict(os.environ, HYPEQUIL_PURE="1"))
    assert out.returncode == 0, out.stderr
    assert out.stdout.strip() == "ok"
