"""Time the compiled and numpy step kernels on the same problems.

Run with ``python3 benchmarks/bench_step.py``; prints one line per
(problem, backend) with the best-of-N wall time and the speedup.
"""

import argparse
import time

import numpy as np

from hjdg.grid import SpaceTimeGrid
from hjdg.kernels import BACKENDS
from hjdg.problem import DataSpec, DiffusionSpec, ProblemSpec, SourceSpec
from hjdg.solver import SchemeConfig, solve


def problem(dim: int, cells: int, eps: float) -> ProblemSpec:
    h = 2.0 / cells
    g = SpaceTimeGrid.from_bounds([-1.0] * dim, [1.0] * dim, h, 1 / 64, 0, 0.125)
    diff = DiffusionSpec.checkerboard(eps, 0.25 * eps, 4 * h, dim, (-1.0,) * dim)
    return ProblemSpec(3.0, 1.0, eps, 2.0, eps, diff, SourceSpec("constant", c=0.5), g,
                       DataSpec("tanh", {"width": 0.05}))


def best_of(spec, backend, repeats):
    times = []
    for _ in range(repeats):
        t0 = time.perf_counter()
        u = solve(spec, SchemeConfig(backend=backend))
        times.append(time.perf_counter() - t0)
    return min(times), u


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeats", type=int, default=3)
    args = ap.parse_args()
    cases = [(1, 1024, 0.0), (1, 1024, 0.01), (2, 128, 0.0), (2, 128, 0.01)]
    for dim, cells, eps in cases:
        spec = problem(dim, cells, eps)
        results = {b: best_of(spec, b, args.repeats) for b in BACKENDS}
        base = results["numpy"][0]
        ref = results["numpy"][1].values
        for b, (t, u) in results.items():
            diff = float(np.abs(u.values - ref).max())
            print(f"n={dim} cells={cells} eps={eps:<5} {b:<7} {t:8.4f}s  speedup {base / t:6.2f}x  "
                  f"substeps {u.meta['substeps']}  max|diff| {diff:.1e}")


if __name__ == "__main__":
    main()
