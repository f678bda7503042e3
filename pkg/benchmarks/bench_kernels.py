"""Compare the compiled and pure-Python kernels, and warm vs cold oracle starts.

Usage::

    python benchmarks/bench_kernels.py [--repeat 5]
"""

import argparse
import timeit

import numpy as np

from ucsaddle import _pykernels, kernels
from ucsaddle.oracle import InexactOracle
from ucsaddle.problem import Box, make_bilinear_coupling, sin_quadratic_field


def bench_fgm(repeat):
    rng = np.random.default_rng(0)
    rows = []
    for q in (2.0, 3.0, 4.0):
        for dim in (10, 100):
            b = rng.standard_normal(dim)
            y0 = np.zeros(dim)
            args = (y0, b, 1.0, q, 200, 1.0, 0.0, 0.0, 2.0 ** 40)
            t_c = min(timeit.repeat(lambda: kernels.fgm_power(*args), number=5, repeat=repeat)) / 5
            t_p = min(timeit.repeat(lambda: _pykernels.fgm_power(*args), number=5,
                                    repeat=repeat)) / 5
            rows.append((f"fgm_power q={q:g} n={dim}", t_c, t_p))
    return rows


def bench_simplex(repeat):
    rng = np.random.default_rng(1)
    rows = []
    for dim in (10, 1000):
        v = rng.standard_normal(dim)
        t_c = min(timeit.repeat(lambda: kernels.project_simplex(v, 1.0), number=200,
                                repeat=repeat)) / 200
        t_p = min(timeit.repeat(lambda: _pykernels.project_simplex(v, 1.0), number=200,
                                repeat=repeat)) / 200
        rows.append((f"project_simplex n={dim}", t_c, t_p))
    return rows


def warm_start_ab(q=3.0, dim=10, steps=50):
    """Inner iterations along a slowly moving x-sequence, cold vs warm started."""
    rng = np.random.default_rng(2)
    a = rng.standard_normal((dim, dim)) / np.sqrt(dim)
    p = make_bilinear_coupling(dim, dim, a, sin_quadratic_field(dim, rng), 1.0, q,
                               Box.cube(dim, -1, 1))
    path = np.linspace(np.full(dim, 0.5), np.full(dim, -0.4), steps)
    totals = {}
    for mode in ("cold", "warm"):
        oracle = InexactOracle(p)
        y = None
        for x in path:
            r = oracle(x, 1e-6, y if mode == "warm" else None)
            y = r.y
        totals[mode] = oracle.inner_iterations
    return totals


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=5)
    args = parser.parse_args()
    print(f"compiled backend: {kernels.BACKEND}")
    print(f"{'kernel':<28} {'compiled [us]':>14} {'python [us]':>12} {'speedup':>8}")
    for name, t_c, t_p in bench_fgm(args.repeat) + bench_simplex(args.repeat):
        print(f"{name:<28} {1e6 * t_c:>14.1f} {1e6 * t_p:>12.1f} {t_p / t_c:>8.1f}")
    totals = warm_start_ab()
    print(f"\ninner iterations over a 50-point path (q=3): cold {totals['cold']}, "
          f"warm {totals['warm']}")


if __name__ == "__main__":
    main()
