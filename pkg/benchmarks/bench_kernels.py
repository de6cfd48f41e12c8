"""Benchmark: compiled kernels versus the NumPy fallback.

Runs each hot kernel on realistic workloads and prints a timing table.
The fallback is always importable; the native column is skipped when the
extension is not built.

    python benchmarks/bench_kernels.py [--repeat 5]
"""

import argparse
import time

import numpy as np

from hypequil._kernels import _fallback as F

try:
    from hypequil._kernels import _native as N
except ImportError:
    N = None


def sample_points(rng, m, dim=2, radius=3.0):
    base = np.zeros(dim + 1)
    base[0] = 1.0
    g = rng.standard_normal((m, dim + 1))
    g[:, 0] = 0.0
    g /= np.linalg.norm(g[:, 1:], axis=1)[:, None]
    return F.batch_exp_map(base, np.ascontiguousarray(g), radius * rng.random(m))


def timeit(fn, repeat):
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def workloads(rng):
    pts = np.ascontiguousarray(sample_points(rng, 4000))
    small = np.ascontiguousarray(pts[:600])
    xs = np.ascontiguousarray(sample_points(rng, 10_000))
    ys = np.ascontiguousarray(sample_points(rng, 10_000))
    zs = np.ascontiguousarray(sample_points(rng, 10_000))
    ts = rng.random(10_000)
    t_vals = rng.random(4000) + 1.0
    x, y = np.ascontiguousarray(pts[0]), np.ascontiguousarray(pts[1])

    def scalar_loop(mod):
        def run():
            for _ in range(20_000):
                mod.dist(x, y)
                mod.geodesic_point(x, y, 0.3)
        return run

    return [
        ("scalar dist+geodesic x20k", scalar_loop),
        ("stewart batch 1e4", lambda mod:
            lambda: mod.stewart_worst(xs, ys, zs, ts)),
        ("cosh convexity batch 1e4", lambda mod:
            lambda: mod.cosh_convexity_worst(xs, ys, zs, ts)),
        ("cosh_dist_table 600x4000", lambda mod:
            lambda: mod.cosh_dist_table(small, pts)),
        ("oracle penalized scan 4000^2", lambda mod:
            lambda: mod.oracle_scan_penalized(pts, t_vals, t_vals, 0.05)),
    ]


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--repeat", type=int, default=3)
    args = parser.parse_args()
    rng = np.random.default_rng(0)

    rows = []
    for name, make in workloads(rng):
        t_fallback = timeit(make(F), args.repeat)
        if N is not None:
            t_native = timeit(make(N), args.repeat)
            rows.append((name, t_fallback, t_native,
                         t_fallback / max(t_native, 1e-12)))
        else:
            rows.append((name, t_fallback, None, None))

    header = f"{'kernel':34s} {'numpy':>10s} {'native':>10s} {'speedup':>8s}"
    print(header)
    print("-" * len(header))
    for name, tf, tn, sp in rows:
        if tn is None:
            print(f"{name:34s} {tf * 1e3:9.2f}ms {'--':>10s} {'--':>8s}")
        else:
            print(f"{name:34s} {tf * 1e3:9.2f}ms {tn * 1e3:9.2f}ms {sp:7.1f}x")
    if N is None:
        print("\nnative extension not built; showing fallback only")


if __name__ == "__main__":
    main()
