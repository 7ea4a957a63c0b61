#!/usr/bin/env python3
"""Benchmark the compiled rate kernel against the pure-Python fallback.

Times the scalar rate evaluation on the workload the amplitude optimizer
generates (a spread of amplitudes and loss points) and a full optimized
sweep through each backend.

Run: python benchmarks/bench_fastpath.py
"""
import time

import numpy as np

from cohmdi import fastpath
from cohmdi.keyrate import SearchConfig


def time_scalar(fn, reps: int = 3) -> tuple[float, int]:
    alphas = SearchConfig().scan_grid()
    etas = 10.0 ** (-np.arange(0.0, 30.0, 2.0) / 10.0)
    eps9 = np.full(9, 1e-6)
    calls = 0
    best = float("inf")
    for _ in range(reps):
        t0 = time.perf_counter()
        acc = 0.0
        for eta in etas:
            for alpha in alphas:
                acc += fn(float(alpha), 0.0, eps9, float(eta), 1e-8, 1.16, 1.0, True)
        dt = time.perf_counter() - t0
        calls = len(etas) * len(alphas)
        best = min(best, dt)
    return best, calls


def main():
    print(f"selected backend at import: {fastpath.BACKEND}")
    rows = []

    t_py, calls = time_scalar(fastpath.rate_scalar_python)
    rows.append(("python fallback", t_py, calls))

    if fastpath.rate_scalar_compiled is not None:
        t_c, calls = time_scalar(fastpath.rate_scalar_compiled)
        rows.append(("compiled kernel", t_c, calls))

    print(f"\nscalar rate evaluation ({calls} calls per pass, best of 3):")
    for name, dt, n in rows:
        print(f"  {name:<16} {dt:8.3f} s  ({dt / n * 1e6:8.1f} us/call)")
    if len(rows) == 2:
        print(f"  speedup: {rows[0][1] / rows[1][1]:.1f}x")

    if fastpath.rate_scalar_compiled is not None:
        worst = 0.0
        eps9 = np.full(9, 1e-6)
        for eta in 10.0 ** (-np.arange(0.0, 30.0, 3.0) / 10.0):
            for alpha in np.linspace(0.02, 1.5, 40):
                a = fastpath.rate_scalar_python(float(alpha), 0.0, eps9, float(eta),
                                                1e-8, 1.16, 1.0, True)
                b = fastpath.rate_scalar_compiled(float(alpha), 0.0, eps9, float(eta),
                                                  1e-8, 1.16, 1.0, True)
                worst = max(worst, abs(a - b))
        print(f"\nbackend agreement: max |R_python - R_compiled| = {worst:.3e}")


if __name__ == "__main__":
    main()
