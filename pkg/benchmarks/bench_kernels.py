"""Timing comparison of the numpy and numba kernel backends.

Runs the kernel-bound library operations (Christoffel symbols, full
contraction, bundle norms, covariant derivative) and one small implicit
solve under each available backend, and prints a table of median wall
times with the numba speedup factor.  The numba backend is warmed up
before timing so JIT compilation is excluded.

Usage:
    python benchmarks/bench_kernels.py [--repeats 5] [--sizes 65,129,257]
"""

from __future__ import annotations

import argparse
import statistics
import time

import numpy as np

from desing import backend
from desing.fields import random_smooth_tensor
from desing.grid import ChartGrid
from desing.problem_io import ProblemConfig
from desing.registry import _random_metric, cusp_problem_doc
from desing.solver import solve_ibvp
from desing.tensors import contract_full, covariant_derivative, tensor_norm


def _bench_ops(n: int, seed: int = 0):
    """Benchmark cases on an n x n chart: name -> zero-argument callable."""
    grid = ChartGrid((0.0, 0.0), (1.0, 1.3), (n, n))
    g = _random_metric(grid, seed)
    a = random_smooth_tensor(grid, 1, 1, seed + 1)
    b = random_smooth_tensor(grid, 1, 1, seed + 2)
    npts, m = grid.npoints, grid.m
    inv_flat = np.ascontiguousarray(g.inv.reshape(npts, m, m))
    dg_flat = np.ascontiguousarray(g.dg_array.reshape(npts, m, m, m))
    return {
        f"christoffel {n}x{n}":
            lambda: backend.kernels().christoffel_flat(inv_flat, dg_flat),
        f"contract (1,1)x(1,1) {n}x{n}": lambda: contract_full(a, b),
        f"tensor_norm (1,1) {n}x{n}": lambda: tensor_norm(a, g),
        f"covariant_derivative {n}x{n}": lambda: covariant_derivative(a, g),
    }


def _bench_solve(n: int = 257, steps: int = 16):
    doc = cusp_problem_doc(1.0, n, steps, 0.5)
    problem = ProblemConfig.from_dict(doc).build()
    return {f"cusp solve n={n} steps={steps}": lambda: solve_ibvp(problem)}


def _median_time(fn, repeats: int) -> float:
    times = []
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return statistics.median(times)


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeats", type=int, default=5)
    parser.add_argument("--sizes", type=str, default="65,129",
                        help="comma list of 2-D grid edge sizes")
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()

    sizes = [int(v) for v in args.sizes.split(",") if v.strip()]
    cases = {}
    for n in sizes:
        cases.update(_bench_ops(n, args.seed))
    cases.update(_bench_solve())

    names = backend.available_backends()
    if "numba" not in names:
        print("numba not importable: timing the numpy backend only")

    results: dict[str, dict[str, float]] = {case: {} for case in cases}
    for name in names:
        backend.set_backend(name)
        backend.warmup()
        for case, fn in cases.items():
            fn()  # one untimed call so caches and JIT paths are settled
            results[case][name] = _median_time(fn, args.repeats)

    width = max(len(c) for c in results)
    header = f"{'case':<{width}}  " + "  ".join(f"{n:>10}" for n in names)
    if len(names) == 2:
        header += f"  {'speedup':>8}"
    print(header)
    print("-" * len(header))
    for case, timings in results.items():
        row = f"{case:<{width}}  " + "  ".join(
            f"{timings[n] * 1e3:>8.2f}ms" for n in names)
        if len(names) == 2:
            ratio = timings["numpy"] / max(timings["numba"], 1e-12)
            row += f"  {ratio:>7.2f}x"
        print(row)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
