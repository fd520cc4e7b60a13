#!/usr/bin/env python3
"""Benchmark: compiled kernels vs the numpy fallback.

Times the batch revision maps and the two resampling accumulators on
representative sizes and prints a small table.  Select the backend pool
explicitly; the fallback is exercised by setting REVRANK_PURE_PYTHON.
"""

from __future__ import annotations

import os
import time

import numpy as np


def timed(fn, *args, repeat=5):
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best


def run_suite():
    from revrank import kernels

    rng = np.random.Generator(np.random.PCG64(0))
    n = 1_000_000
    sims = rng.uniform(0, 1, n)
    qs = rng.uniform(0, 1, n)
    priors = rng.uniform(1e-9, 1 - 1e-9, n)

    items, dims, trials = 5000, 10, 1000
    a = rng.integers(0, 30, size=(items, dims)).astype(np.float64)
    b = rng.integers(0, 30, size=(items, dims)).astype(np.float64)
    masks = rng.integers(0, 2, size=(trials, items), dtype=np.uint8)
    idx = rng.integers(0, items, size=(trials, items), dtype=np.int64)

    alphas = kernels.alpha_values(sims, qs)
    return {
        "alpha_values (1e6)": timed(kernels.alpha_values, sims, qs),
        "positive_values (1e6)": timed(kernels.positive_values, priors, alphas),
        "negative_values (1e6)": timed(kernels.negative_values, priors, alphas),
        "swap_pair_sums (1k x 5k x 10)": timed(kernels.swap_pair_sums, a, b, masks),
        "gather_sums (1k x 5k x 10)": timed(kernels.gather_sums, a, idx),
    }


def main() -> int:
    import importlib

    import revrank.kernels

    results = {}
    for label, env in (("compiled", None), ("python", "1")):
        if env is None:
            os.environ.pop("REVRANK_PURE_PYTHON", None)
        else:
            os.environ["REVRANK_PURE_PYTHON"] = env
        importlib.reload(revrank.kernels)
        if revrank.kernels.backend_name() != label:
            print(f"(backend {label!r} unavailable, skipping)")
            continue
        results[label] = run_suite()

    names = sorted(next(iter(results.values())))
    width = max(len(n) for n in names)
    header = f"{'kernel'.ljust(width)}  " + "  ".join(f"{k:>12}" for k in results)
    print(header)
    print("-" * len(header))
    for name in names:
        row = "  ".join(f"{results[k][name] * 1e3:>10.2f}ms" for k in results)
        print(f"{name.ljust(width)}  {row}")
    if {"compiled", "python"} <= results.keys():
        print()
        for name in names:
            ratio = results["python"][name] / results["compiled"][name]
            print(f"{name.ljust(width)}  python/compiled = {ratio:5.2f}x")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
