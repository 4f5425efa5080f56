"""Time the compiled kernels against the numpy fallback.

Runs each hot kernel on identical inputs under both backends and prints a
small table with best-of-N wall times and the speedup ratio.  Usage::

    python3 benchmarks/bench_backends.py [--repeats 5] [--grid 64] [--sa-iters 20000]
"""

import argparse
import time

import numpy as np

from mapfit import _kernels_py
from mapfit.grid import gaussian_kernel

try:
    from mapfit import _kernels
except ImportError:
    _kernels = None


def best_of(repeats, fn, *args):
    best = np.inf
    for _ in range(repeats):
        start = time.perf_counter()
        result = fn(*args)
        best = min(best, time.perf_counter() - start)
    return best, result


def build_cases(grid, sa_iters, seed=0):
    rng = np.random.default_rng(seed)
    volume = rng.normal(size=(grid, grid, grid))
    other = rng.normal(size=(grid, grid, grid))
    taps = gaussian_kernel(1.87)
    offset = np.asarray([grid // 3, -grid // 4, 5], dtype=np.int64)

    m, N = 3, 6
    n = m * N
    Q = rng.normal(size=(n, n))
    Q = 0.5 * (Q + Q.T)
    for i in range(m):
        Q[i * N:(i + 1) * N, i * N:(i + 1) * N] = 0.0
    b = rng.normal(size=n)
    y0 = np.full(n, 1.0 / N)
    normals = rng.normal(size=(sa_iters, n))
    uniforms = rng.uniform(size=sa_iters)

    return [
        ("blur_3d", (volume, taps)),
        ("laplacian_3d", (volume,)),
        ("overlap_dot", (volume, other, offset)),
        ("sa_minimize", (Q, b, m, N, y0, 100.0, 0.95, 1.0, sa_iters,
                         normals, uniforms, False)),
        ("brute_force_min", (Q, b, m, N)),
    ]


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeats", type=int, default=5,
                        help="take the best of this many runs")
    parser.add_argument("--grid", type=int, default=64,
                        help="edge length of the benchmark volume")
    parser.add_argument("--sa-iters", type=int, default=20000,
                        help="annealing iterations in the SA case")
    args = parser.parse_args()

    if _kernels is None:
        print("compiled extension not available; nothing to compare")
        return 1

    cases = build_cases(args.grid, args.sa_iters)
    print(f"volume {args.grid}^3, SA iterations {args.sa_iters}, "
          f"best of {args.repeats}")
    header = f"{'kernel':<16}{'python':>12}{'compiled':>12}{'speedup':>10}"
    print(header)
    print("-" * len(header))
    for name, case_args in cases:
        py_time, py_result = best_of(args.repeats,
                                     getattr(_kernels_py, name), *case_args)
        c_time, c_result = best_of(args.repeats,
                                   getattr(_kernels, name), *case_args)
        if name == "brute_force_min":
            assert np.array_equal(py_result[0], c_result[0])
        elif name == "sa_minimize":
            assert np.allclose(py_result[1], c_result[1])
        elif name == "overlap_dot":
            assert np.isclose(py_result, c_result)
        else:
            assert np.allclose(py_result, c_result)
        print(f"{name:<16}{py_time * 1e3:>10.2f}ms{c_time * 1e3:>10.2f}ms"
              f"{py_time / c_time:>9.1f}x")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
