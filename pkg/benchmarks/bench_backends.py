"""Benchmark the jitted pointwise kernels against the pure-numpy fallback,
plus the two weak Dirichlet-Neumann construction paths.

Run:  python3 benchmarks/bench_backends.py [--points 200000] [--repeat 5]

Backend selection for the library is environment-driven
(LAYERFLOW_BACKEND=numba|numpy|auto); this script imports both kernel
implementations directly so one process can time them side by side.
"""

import argparse
import time

import numpy as np


def timeit(fn, repeat):
    fn()  # warm-up / jit compile
    best = np.inf
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def bench_pointwise(points, repeat):
    from layerflow import _accel_numba as jit
    from layerflow import _accel_numpy as ref

    rng = np.random.default_rng(0)
    for n in (2, 3):
        a = 0.1 * rng.normal(size=(points, n, n)) + np.eye(n)
        calb = 0.1 * rng.normal(size=(points, n, n))
        gcalb = rng.normal(size=(points, n, n, n))
        gu = rng.normal(size=(points, n, n))
        hu = rng.normal(size=(points, n, n, n))

        cases = [
            ("inv_det", lambda m: m.inv_det(a)),
            ("lambda_terms", lambda m: m.lambda_terms(calb, gcalb, gu, hu)),
            ("stress_correction", lambda m: m.boundary_stress_matrix(a - np.eye(n), calb, gu, 1.0)),
        ]
        print(f"\npointwise kernels, N={n}, {points} points")
        for name, call in cases:
            t_np = timeit(lambda: call(ref), repeat)
            t_nb = timeit(lambda: call(jit), repeat)
            out_np = call(ref)
            out_nb = call(jit)
            if isinstance(out_np, tuple):
                gap = max(np.max(np.abs(x - y)) for x, y in zip(out_np, out_nb))
            else:
                gap = np.max(np.abs(out_np - out_nb))
            print(f"  {name:18s} numpy {t_np * 1e3:8.2f} ms   numba {t_nb * 1e3:8.2f} ms"
                  f"   speedup {t_np / t_nb:5.2f}x   max-diff {gap:.2e}")


def bench_weak_dn_paths(repeat):
    """Direct collocation solve vs explicit kernel quadrature, per frequency band.

    Records which construction is cheaper as |xi'| grows; accuracy of both is
    pinned by the test suite, so this is a cost comparison only.
    """
    from layerflow import forward_transform, make_grid
    from layerflow.weak_dn import solve_weak_dn, solve_weak_dn_kernel_path

    print("\nweak Dirichlet-Neumann: collocation vs kernel path")
    for n in (16, 32, 64):
        grid = make_grid(2, 1.0, 2 * np.pi, n, n + 1)
        x, z = grid.meshgrid()
        zb = z * (grid.depth - z)
        bump = (zb / np.max(zb)) ** 2
        f = np.zeros(grid.physical_shape((2,)))
        f[..., 0] = np.cos(2 * np.pi * x / grid.period) * bump
        f[..., 1] = np.sin(4 * np.pi * x / grid.period) * bump
        field = forward_transform(grid, f)
        t_bvp = timeit(lambda: solve_weak_dn(field), repeat)
        t_ker = timeit(lambda: solve_weak_dn_kernel_path(field), repeat)
        xi_max = float(np.sqrt(np.max(grid.xi2)))
        print(f"  {n:3d}x{n + 1:<3d} (|xi'| up to {xi_max:6.1f})   "
              f"collocation {t_bvp * 1e3:8.2f} ms   kernel {t_ker * 1e3:8.2f} ms")


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--points", type=int, default=200_000)
    parser.add_argument("--repeat", type=int, default=5)
    args = parser.parse_args()
    bench_pointwise(args.points, args.repeat)
    bench_weak_dn_paths(args.repeat)


if __name__ == "__main__":
    main()
