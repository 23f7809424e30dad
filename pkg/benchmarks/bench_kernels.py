"""Benchmark the compiled kernel backend against the pure-numpy fallback.

Run:  python benchmarks/bench_kernels.py [repeats]
"""

import sys
import time

import numpy as np

from pg3flows._kernels import fastback, pyback


def bench(fn, args_list, repeats):
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        for args in args_list:
            fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best


def main():
    repeats = int(sys.argv[1]) if len(sys.argv) > 1 else 5
    rng = np.random.default_rng(0)
    n = 20000

    quats = [(rng.standard_normal(4), rng.standard_normal(4)) for _ in range(n)]
    frames = []
    for _ in range(n):
        f = np.linalg.qr(rng.standard_normal((4, 2)))[0]
        g = np.linalg.qr(rng.standard_normal((4, 2)))[0]
        frames.append((f, g))
    pluckers = [(rng.standard_normal(6), rng.standard_normal(6)) for _ in range(n)]
    vecs = [(rng.standard_normal(4),) for _ in range(n)]

    cases = [
        ("quat_mul", quats),
        ("plucker_from_frame", [(f[:, 0], f[:, 1]) for f, _ in frames]),
        ("plucker_pairing", pluckers),
        ("frame_distance", frames),
        ("sign_canonical", vecs),
        ("orthonormalize_pair", [(rng.standard_normal(4), rng.standard_normal(4))
                                 for _ in range(n)]),
    ]

    print(f"{n} calls per kernel, best of {repeats} repeats")
    print(f"{'kernel':<22}{'python (s)':>12}{'cython (s)':>12}{'speedup':>10}")
    for name, args_list in cases:
        tp = bench(getattr(pyback, name), args_list, repeats)
        tc = bench(getattr(fastback, name), args_list, repeats)
        print(f"{name:<22}{tp:>12.4f}{tc:>12.4f}{tp / tc:>9.1f}x")


if __name__ == "__main__":
    main()
