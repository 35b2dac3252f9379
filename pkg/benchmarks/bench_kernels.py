"""Time the numba and numpy variants of every kernel.

    python3 benchmarks/bench_kernels.py [--repeat 5]

The first numba call compiles (or loads the on-disk cache) and is timed
separately as "warm-up".
"""
import argparse
import time

import numpy as np

from uqkit import kernels
from uqkit.designs import sobol_direction_numbers


def _best(fn, repeat):
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def cases():
    rng = np.random.default_rng(0)
    idx = np.arange(1, 200_001, dtype=np.int64)
    fidx = np.arange(1, 20_001, dtype=np.int64)
    base = 5
    nd = kernels._n_digits(int(fidx.max()), base)
    pascal = np.stack([kernels._pascal_power_mod(nd, j, base) for j in range(5)])
    V = sobol_direction_numbers(8)
    pts = rng.random((2000, 4))
    data = rng.standard_normal(5000)
    grid = np.linspace(-4, 4, 2000)
    H, _ = kernels._ks_matrix(100, 0.2)
    return [
        ("radical_inverse n=2e5", lambda: kernels.radical_inverse_loops(idx, 3), lambda: kernels.radical_inverse_numpy(idx, 3)),
        ("faure n=2e4 d=5", lambda: kernels.faure_loops(fidx, 5, base, pascal), lambda: kernels.faure_numpy(fidx, 5, base, pascal)),
        ("sobol n=2e5 d=8", lambda: kernels.sobol_loops(200_000, V), lambda: kernels.sobol_numpy(200_000, V)),
        ("l2 discrepancy n=2000 d=4", lambda: kernels.l2_star_discrepancy_loops(pts), lambda: kernels.l2_star_discrepancy_numpy(pts)),
        ("ks matrix power n=100", lambda: kernels._ks_power_loops(H, 100), lambda: kernels._ks_power_numpy(H, 100)),
        ("kde 2000 x 5000", lambda: kernels.gaussian_kernel_sum_loops(grid, data, 0.3), lambda: kernels.gaussian_kernel_sum_numpy(grid, data, 0.3)),
    ]


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    print(f"{'kernel':30s} {'warm-up':>10s} {'numba':>10s} {'numpy':>10s} {'speed-up':>9s}")
    for name, loops, vec in cases():
        t0 = time.perf_counter()
        loops()
        warm = time.perf_counter() - t0
        tl = _best(loops, args.repeat)
        tn = _best(vec, args.repeat)
        print(f"{name:30s} {warm:10.4f} {tl:10.4f} {tn:10.4f} {tn / tl:8.1f}x")


if __name__ == "__main__":
    main()
