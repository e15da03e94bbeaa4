#!/usr/bin/env python3
"""Benchmark the compiled vs pure-Python network simplex kernels.

Times single transport solves across instance sizes and end-to-end pair
scoring with each kernel, verifying on the way that both kernels return
identical plans.

Usage: python benchmarks/bench_kernels.py [--repeats N] [--pairs N]
"""

import argparse
import statistics
import time

import numpy as np

import baryscore as bs
from baryscore import kernels


def euclidean_instance(rng, n, m, d=16):
    x = rng.normal(size=(n, d))
    y = rng.normal(size=(m, d))
    C = ((x[:, None, :] - y[None, :, :]) ** 2).sum(-1)
    a = rng.random(n) + 0.05
    a /= a.sum()
    b = rng.random(m) + 0.05
    b /= b.sum()
    return a, b, C


def time_kernel(kernel, instances, repeats):
    timings = []
    for _ in range(repeats):
        started = time.perf_counter()
        for a, b, C in instances:
            kernel(a, b, C, 5e-13 * C.max(), 10**6)
        timings.append((time.perf_counter() - started) / len(instances))
    return min(timings)


def bench_solves(repeats):
    rng = np.random.default_rng(0)
    available = kernels.available_kernels()
    print(f"active kernel: {kernels.ACTIVE_KERNEL}")
    print(f"{'size':>10} {'pivots':>8} " + " ".join(
        f"{name:>12}" for name in available) + f" {'speedup':>9}")
    for n in (10, 30, 100, 200):
        instances = [euclidean_instance(rng, n, n) for _ in range(3)]
        pivots = []
        results = {}
        for name, kernel in available.items():
            plans = [kernel(a, b, C, 5e-13 * C.max(), 10**6)
                     for a, b, C in instances]
            results[name] = plans
            pivots = [p[1] for p in plans]
        names = list(available)
        for first, second in zip(names, names[1:]):
            for p1, p2 in zip(results[first], results[second]):
                assert np.array_equal(p1[0], p2[0]), "kernel plans differ"
        row_times = {
            name: time_kernel(kernel, instances, repeats)
            for name, kernel in available.items()
        }
        speedup = ""
        if "python" in row_times and "cython" in row_times:
            speedup = f"{row_times['python'] / row_times['cython']:9.1f}x"
        print(f"{n:>4}x{n:<5} {statistics.mean(pivots):>8.0f} " + " ".join(
            f"{row_times[name] * 1e3:>10.2f}ms" for name in available)
            + f" {speedup}")


def bench_scoring(n_pairs):
    rng = np.random.default_rng(1)
    cands, refs = [], []
    for i in range(n_pairs):
        base = rng.normal(size=(int(rng.integers(5, 25)), 64))
        tensor = np.stack([base + 0.3 * rng.normal(size=base.shape)
                           for _ in range(4)])
        cands.append(bs.LayeredEmbedding(
            f"c{i}", [f"w{int(t)}" for t in rng.integers(0, 40, len(base))],
            tensor))
        base = rng.normal(size=(int(rng.integers(5, 25)), 64))
        tensor = np.stack([base + 0.3 * rng.normal(size=base.shape)
                           for _ in range(4)])
        refs.append(bs.LayeredEmbedding(
            f"r{i}", [f"w{int(t)}" for t in rng.integers(0, 40, len(base))],
            tensor))
    idf = bs.compute_idf([r.tokens for r in refs])
    print(f"\nend-to-end scoring, {n_pairs} pairs (n<=24, d=64, L=4):")
    original = kernels.solve_kernel
    try:
        for name, kernel in kernels.available_kernels().items():
            kernels.solve_kernel = kernel
            started = time.perf_counter()
            bs.batch_score(cands, refs, idf, bs.ScoreConfig(), workers=1)
            elapsed = time.perf_counter() - started
            print(f"  {name:>8}: {elapsed:6.2f}s "
                  f"({n_pairs / elapsed:6.1f} pairs/s)")
    finally:
        kernels.solve_kernel = original


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--repeats", type=int, default=3)
    parser.add_argument("--pairs", type=int, default=100,
                        help="pairs for the end-to-end benchmark (0 skips)")
    args = parser.parse_args()
    bench_solves(args.repeats)
    if args.pairs:
        bench_scoring(args.pairs)


if __name__ == "__main__":
    main()
