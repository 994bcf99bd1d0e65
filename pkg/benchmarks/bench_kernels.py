#!/usr/bin/env python3
"""Benchmark the compiled kernel core against the numpy fallback, plus the
prefix-count threshold sweep against a per-threshold rescan.

Usage: python3 benchmarks/bench_kernels.py [--size 256] [--images 50]
"""

import argparse
import time

import numpy as np

from segsweep import sweep
from segsweep._kernels import compiled_backend, numpy_backend
from segsweep.types import BinaryMask, ProbabilityMap, ThresholdGrid


def timeit(fn, repeats=5):
    best = float("inf")
    for _ in range(repeats):
        start = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - start)
    return best


def bench_backends(size):
    rng = np.random.default_rng(0)
    pred = rng.random((size, size)) < 0.5
    truth = rng.random((size, size)) < 0.5
    vals = np.sort(rng.random(size * size))
    grid = ThresholdGrid.default().values
    se = np.array([[0, 1, 0], [1, 1, 1], [0, 1, 0]], dtype=bool)

    cases = {
        "confusion_counts": lambda b: b.confusion_counts(pred, truth),
        "count_le": lambda b: b.count_le(vals, grid),
        "erode": lambda b: b.erode(pred, se, False),
        "dilate": lambda b: b.dilate(pred, se),
    }
    print(f"kernel benchmarks on {size}x{size} inputs (best of 5)")
    header = f"{'kernel':<18} {'numpy':>12} {'cython':>12} {'speedup':>9}"
    print(header)
    print("-" * len(header))
    for name, call in cases.items():
        t_np = timeit(lambda: call(numpy_backend))
        if compiled_backend is None:
            print(f"{name:<18} {t_np * 1e3:>10.3f}ms {'n/a':>12} {'n/a':>9}")
            continue
        t_cy = timeit(lambda: call(compiled_backend))
        print(
            f"{name:<18} {t_np * 1e3:>10.3f}ms {t_cy * 1e3:>10.3f}ms "
            f"{t_np / t_cy:>8.1f}x"
        )
    print()


def bench_sweep(size, images):
    rng = np.random.default_rng(1)
    pairs = [
        (
            ProbabilityMap(rng.random((size, size))),
            BinaryMask(rng.random((size, size)) < 0.5),
        )
        for _ in range(images)
    ]
    grid = ThresholdGrid.default()

    def fast():
        for pm, truth in pairs:
            sweep.sweep_image(pm, truth, grid)

    def naive():
        for pm, truth in pairs:
            vals = pm.data.astype(np.float64)
            for t in grid:
                pred = vals > t
                np.count_nonzero(pred & truth.data)
                np.count_nonzero(pred & ~truth.data)
                np.count_nonzero(~pred & truth.data)

    t_fast = timeit(fast, repeats=3)
    t_naive = timeit(naive, repeats=3)
    print(
        f"threshold sweep, {images} images {size}x{size}, {len(grid)} thresholds:\n"
        f"  sorted prefix counts {t_fast:.3f}s vs per-threshold rescan "
        f"{t_naive:.3f}s ({t_naive / t_fast:.1f}x)"
    )


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--size", type=int, default=256)
    parser.add_argument("--images", type=int, default=50)
    args = parser.parse_args()
    if compiled_backend is None:
        print("note: compiled core not built; numpy fallback only\n")
    bench_backends(args.size)
    bench_sweep(args.size, args.images)


if __name__ == "__main__":
    main()
