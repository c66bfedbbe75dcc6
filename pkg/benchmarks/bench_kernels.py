"""Time the compiled update kernels against the numpy fallback.

Run from the repository root:

    python3 benchmarks/bench_kernels.py [--dim 1000] [--reps 20000]

Both lanes are exercised through the same call sites; the compiled
lane must also produce bitwise-identical output, which is asserted
before timing.
"""

import argparse
import timeit

import numpy as np

from leadopt import _fused_py
from leadopt.kernels import BACKEND, impl


def _cases(dim, rng):
    x = rng.standard_normal(dim)
    g = rng.standard_normal(dim)
    xl = rng.standard_normal(dim)
    xg = rng.standard_normal(dim)
    return [
        ("lsgd_update", (x, g, xl, xg, 0.05, 0.3, 0.1)),
        ("sgd_update", (x, g, 0.05)),
        ("pull_update", (x, xl, 0.3)),
        ("eagd_worker_update", (x, g, xg, 0.05, 0.3)),
        ("eagd_center_update", (xg, xl, 0.15)),
    ]


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--dim", type=int, default=1000)
    parser.add_argument("--reps", type=int, default=20000)
    args = parser.parse_args()

    rng = np.random.Generator(np.random.Philox(7))
    print(f"active backend: {BACKEND}  (dim={args.dim}, reps={args.reps})")
    if impl is _fused_py:
        print("compiled lane unavailable; timing the numpy lane against itself")

    print(f"{'kernel':<22}{'compiled us':>14}{'numpy us':>12}{'speedup':>10}")
    for name, kernel_args in _cases(args.dim, rng):
        fast = getattr(impl, name)
        slow = getattr(_fused_py, name)
        assert np.array_equal(fast(*kernel_args), slow(*kernel_args)), name
        t_fast = timeit.timeit(lambda: fast(*kernel_args), number=args.reps)
        t_slow = timeit.timeit(lambda: slow(*kernel_args), number=args.reps)
        us = 1e6 / args.reps
        print(f"{name:<22}{t_fast * us:>14.2f}{t_slow * us:>12.2f}"
              f"{t_slow / t_fast:>10.2f}x")


if __name__ == "__main__":
    main()
