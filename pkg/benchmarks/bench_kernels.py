#!/usr/bin/env python3
"""Benchmark the compiled kernels against the NumPy fallback.

Usage: python3 benchmarks/bench_kernels.py [--repeats N]
"""

import argparse
import time

import numpy as np

from afva import kernels


def best_of(fn, repeats):
    timings = []
    for _ in range(repeats):
        start = time.perf_counter()
        fn()
        timings.append(time.perf_counter() - start)
    return min(timings)


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--repeats", type=int, default=5)
    args = parser.parse_args()

    if not kernels.HAS_NATIVE:
        print("compiled extension not available; benchmarking fallback only")

    rng = np.random.default_rng(0)
    rows = []
    for size in (128, 256, 512, 1024):
        img = rng.random((size, size))
        cases = {
            f"lbp {size}x{size}": (
                lambda i=img: kernels.reference.lbp_counts(i),
                (lambda i=img: kernels.lbp_counts(i)) if kernels.HAS_NATIVE else None,
            ),
            f"resize {size}->128": (
                lambda i=img: kernels.reference.resize_bilinear(i, 128, 128),
                (lambda i=img: kernels.resize_bilinear(i, 128, 128))
                if kernels.HAS_NATIVE
                else None,
            ),
        }
        for name, (fallback, native) in cases.items():
            t_fallback = best_of(fallback, args.repeats)
            if native is not None:
                t_native = best_of(native, args.repeats)
                rows.append((name, t_fallback, t_native, t_fallback / t_native))
            else:
                rows.append((name, t_fallback, float("nan"), float("nan")))

    header = f"{'kernel':<18} {'numpy (ms)':>12} {'native (ms)':>12} {'speedup':>9}"
    print(header)
    print("-" * len(header))
    for name, t_fallback, t_native, speedup in rows:
        print(
            f"{name:<18} {t_fallback * 1e3:>12.3f} {t_native * 1e3:>12.3f} "
            f"{speedup:>8.1f}x"
        )


if __name__ == "__main__":
    main()
