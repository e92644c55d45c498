#!/usr/bin/env python3
"""Benchmark the compiled objective kernel against the numpy fallback.

Times the batched concentrated-power evaluation that dominates grid-search
estimation, at the batch sizes the coarse-to-fine search actually uses.

Usage: python benchmarks/bench_kernels.py
"""

import time

import numpy as np

from isac_lab.kernels import HAS_COMPILED, accumulate_path_power


def time_lane(use_compiled: bool, batch: int, n_pulses: int, repeats: int = 5) -> float:
    rng = np.random.default_rng(0)
    tau = rng.uniform(1e-6, 1e-5, batch)
    r = rng.uniform(-60.0, 60.0, batch)
    y = rng.standard_normal(n_pulses) + 1j * rng.standard_normal(n_pulses)
    carriers = 1e6 + rng.uniform(-2e5, 2e5, n_pulses)
    times = np.arange(n_pulses) - (n_pulses - 1) / 2.0
    best = np.inf
    for _ in range(repeats):
        out = np.zeros(batch)
        t0 = time.perf_counter()
        accumulate_path_power(
            tau, r, y, carriers, times, 3e8, out, use_compiled=use_compiled
        )
        best = min(best, time.perf_counter() - t0)
    return best


def main():
    print(f"compiled extension available: {HAS_COMPILED}")
    print(f"{'batch':>8} {'pulses':>7} {'numpy [ms]':>11} {'compiled [ms]':>14} {'speedup':>8}")
    for batch, n_pulses in ((2401, 12), (12005, 12), (50625, 12), (50625, 64)):
        t_np = time_lane(False, batch, n_pulses)
        if HAS_COMPILED:
            t_cy = time_lane(True, batch, n_pulses)
            print(
                f"{batch:>8} {n_pulses:>7} {t_np * 1e3:>11.2f} {t_cy * 1e3:>14.2f} "
                f"{t_np / t_cy:>7.2f}x"
            )
        else:
            print(f"{batch:>8} {n_pulses:>7} {t_np * 1e3:>11.2f} {'-':>14} {'-':>8}")

    # the two lanes agree numerically
    rng = np.random.default_rng(1)
    tau = rng.uniform(1e-6, 1e-5, 503)
    r = rng.uniform(-60.0, 60.0, 503)
    y = rng.standard_normal(16) + 1j * rng.standard_normal(16)
    carriers = 1e6 + rng.uniform(-2e5, 2e5, 16)
    times = np.arange(16.0)
    a = np.zeros(503)
    b = np.zeros(503)
    accumulate_path_power(tau, r, y, carriers, times, 3e8, a, use_compiled=False)
    if HAS_COMPILED:
        accumulate_path_power(tau, r, y, carriers, times, 3e8, b, use_compiled=True)
        rel = np.max(np.abs(a - b) / np.abs(a))
        print(f"\nlane agreement: max relative difference {rel:.3e}")


if __name__ == "__main__":
    main()
