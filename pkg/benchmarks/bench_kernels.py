"""Benchmark the compiled welfare kernels against the numpy fallbacks.

Runs both implementations in one process (the compiled path requires
numba; without it only the fallback timings are reported).  The same
comparison can be forced package-wide by setting OFLP_NO_NUMBA=1.

Usage: python benchmarks/bench_kernels.py [n_agents] [n_queries]
"""

from __future__ import annotations

import sys
import time

import numpy as np

from oflp import _kernels as K


def _time(fn, *args, repeat: int = 5) -> float:
    fn(*args)  # warm-up (includes JIT compilation for the numba path)
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best


def main() -> None:
    n = int(sys.argv[1]) if len(sys.argv) > 1 else 200
    m = int(sys.argv[2]) if len(sys.argv) > 2 else 100_000
    rng = np.random.default_rng(0)
    xs = rng.uniform(0.0, 1.0, n)
    ys = rng.uniform(0.0, 1.0, n)
    qs = rng.uniform(0.0, 1.0, m)
    qt = rng.uniform(0.0, 1.0, m)

    cases = [
        ("segment welfare (many)", K._seg_welfare_many_loop, K._seg_welfare_many_np, (xs, qs)),
        ("circle welfare (many)", K._circle_welfare_many_loop, K._circle_welfare_many_np, (xs, qs)),
        ("square welfare (many)", K._square_welfare_many_loop, K._square_welfare_many_np, (xs, ys, qs, qt)),
    ]

    njit = None
    if K.USE_NUMBA:
        from numba import njit as _njit

        njit = _njit

    print(f"agents={n} queries={m} numba={'on' if njit else 'off'}")
    print(f"{'kernel':26s} {'numpy':>10s} {'numba':>10s} {'speedup':>8s}")
    for name, loop, fallback, args in cases:
        t_np = _time(fallback, *args)
        if njit is not None:
            compiled = njit(cache=True)(loop)
            t_nb = _time(compiled, *args)
            print(f"{name:26s} {t_np*1e3:9.2f}ms {t_nb*1e3:9.2f}ms {t_np/t_nb:7.1f}x")
        else:
            print(f"{name:26s} {t_np*1e3:9.2f}ms {'-':>10s} {'-':>8s}")


if __name__ == "__main__":
    main()
