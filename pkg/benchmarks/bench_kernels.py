#!/usr/bin/env python3
"""Timing comparison of the compiled kernels against the NumPy fallback.

Runs each hot kernel on a Monte-Carlo-sized workload with both backends
loaded side by side and prints median wall times plus the speedup. Invoke
from the repo root:

    python3 benchmarks/bench_kernels.py [--n-obs N] [--repeats R]
"""

import argparse
import importlib
import statistics
import time

import numpy as np

from mapbound._kernels import _py

try:
    _native = importlib.import_module("mapbound._kernels._native")
except ImportError:
    _native = None


def bench(fn, args, repeats):
    times = []
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn(*args)
        times.append(time.perf_counter() - t0)
    return statistics.median(times)


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--n-obs", type=int, default=200_000,
                    help="observations per kernel call")
    ap.add_argument("--repeats", type=int, default=7)
    args = ap.parse_args()

    rng = np.random.default_rng(0)
    n = args.n_obs

    # two-room 1-D support and a two-rect planar support
    lo = np.array([0.0, 2.0])
    hi = np.array([1.0, 3.0])
    z1 = rng.normal(1.5, 3.0, size=n)

    xlo = np.array([0.0, 0.0]); xhi = np.array([10.0, 5.0])
    ylo = np.array([0.0, 5.0]); yhi = np.array([5.0, 10.0])
    zx = rng.normal(4.0, 3.0, size=n)
    zy = rng.normal(4.0, 3.0, size=n)

    # 4 anchors x 15k grid points, one score pass per range vector
    g = rng.uniform(0.0, 30.0, size=(15_000, 4))
    zr = rng.uniform(0.0, 40.0, size=(128, 4))

    def score_all(mod):
        def run(grid, obs):
            for row in obs:
                mod.ranging_scores(grid, row)
        return run

    cases = [
        ("mmse_1d_batch", (lo, hi, z1, 3.0)),
        ("map_1d_batch", (lo, hi, z1)),
        ("mmse_2d_batch", (xlo, xhi, ylo, yhi, zx, zy, 3.0, 3.0)),
        ("map_2d_gaussian_batch", (xlo, xhi, ylo, yhi, zx, zy, 3.0, 3.0)),
        ("ranging_scores x128", (g, zr)),
    ]

    print(f"{'kernel':<24}{'python':>12}{'native':>12}{'speedup':>10}")
    for name, call_args in cases:
        if name.startswith("ranging"):
            fn_py, fn_nat = score_all(_py), score_all(_native) if _native else None
        else:
            attr = name.split()[0]
            fn_py = getattr(_py, attr)
            fn_nat = getattr(_native, attr) if _native else None
        t_py = bench(fn_py, call_args, args.repeats)
        if fn_nat is None:
            print(f"{name:<24}{t_py * 1e3:>10.2f}ms{'n/a':>12}{'n/a':>10}")
            continue
        t_nat = bench(fn_nat, call_args, args.repeats)
        print(f"{name:<24}{t_py * 1e3:>10.2f}ms{t_nat * 1e3:>10.2f}ms"
              f"{t_py / t_nat:>9.1f}x")
    if _native is None:
        print("\ncompiled extension not built; only the fallback was timed")


if __name__ == "__main__":
    main()
