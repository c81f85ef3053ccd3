"""Time the numba kernels against their numpy fallbacks.

Usage: python3 benchmarks/bench_kernels.py [--sizes 200 500 1000] [--repeat 3]

Both flavours are imported directly from ``ggflex.kernels`` so a single run
compares them; outputs are checked for equality before timing is reported.
"""

import argparse
import time

import numpy as np

from ggflex import kernels
from ggflex._accel import NUMBA_AVAILABLE


def best_of(fn, repeat):
    best = np.inf
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--sizes", type=int, nargs="+", default=[200, 500, 1000])
    ap.add_argument("--dim", type=int, default=2)
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args(argv)
    if not NUMBA_AVAILABLE:
        print("numba unavailable or disabled; both columns time numpy/python code")

    rng = np.random.default_rng(args.seed)
    tiny = rng.random((8, args.dim))
    kernels.gabriel_adjacency_loops(kernels.pairwise_sq_dists_loops(tiny))  # JIT warm-up
    kernels.nearest_hit_miss_loops(kernels.pairwise_sq_dists_loops(tiny), np.zeros(8, np.int8))
    kernels.chipclass_votes_loops(tiny, tiny, tiny, tiny)

    print(f"{'kernel':<18}{'m':>6}{'numba_s':>12}{'numpy_s':>12}{'speedup':>9}  equal")
    for m in args.sizes:
        X = rng.random((m, args.dim))
        y = (rng.random(m) < 0.5).astype(np.int8)
        D = kernels.pairwise_sq_dists_vectorized(X)
        T = rng.random((m, args.dim))
        cases = {
            "pairwise_sq_dists": (lambda: kernels.pairwise_sq_dists_loops(X),
                                  lambda: kernels.pairwise_sq_dists_vectorized(X)),
            "gabriel_adjacency": (lambda: kernels.gabriel_adjacency_loops(D),
                                  lambda: kernels.gabriel_adjacency_vectorized(D)),
            "nearest_hit_miss": (lambda: kernels.nearest_hit_miss_loops(D, y),
                                 lambda: kernels.nearest_hit_miss_vectorized(D, y)),
            "chipclass_votes": (lambda: kernels.chipclass_votes_loops(T, X, X[::-1].copy(), X),
                                lambda: kernels.chipclass_votes_vectorized(T, X, X[::-1].copy(), X)),
        }
        for name, (fast, slow) in cases.items():
            t_fast, a = best_of(fast, args.repeat)
            t_slow, b = best_of(slow, args.repeat)
            a = a if isinstance(a, tuple) else (a,)
            b = b if isinstance(b, tuple) else (b,)
            equal = all(np.allclose(u, v, rtol=1e-12, atol=0) for u, v in zip(a, b))
            print(f"{name:<18}{m:>6}{t_fast:>12.5f}{t_slow:>12.5f}{t_slow / t_fast:>9.1f}  {equal}")


if __name__ == "__main__":
    main()
