#!/usr/bin/env python3
"""Benchmark the compiled kernel core against the numpy fallback.

Run:  python3 benchmarks/bench_kernels.py [--repeats N]

Times the three hot kernels on layout-scale inputs (grid indexing of a
full ingest batch, a KDE surface at continental level, and FDEB force
iterations over a dense compatible-pair set) and reports the speedup of
the compiled extension.
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from geocube._kernels import _fallback

try:
    from geocube._kernels import _core
except ImportError:
    _core = None


def timeit(fn, repeats):
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def bench_grid(repeats):
    rng = np.random.default_rng(0)
    n = 1_000_000
    lon = rng.uniform(-167.0, -57.0, n)
    lat = rng.uniform(6.0, 82.0, n)
    args = (lon, lat, -167.276413, 5.499550, 0.008333, 13312, 9216)
    return (
        f"grid_index_batch ({n:,} coords)",
        timeit(lambda: _core.grid_index_batch(*args), repeats) if _core else None,
        timeit(lambda: _fallback.grid_index_batch(*args), repeats),
    )


def bench_kde(repeats):
    rng = np.random.default_rng(1)
    n = 2_000
    lon = rng.uniform(-120.0, -75.0, n)
    lat = rng.uniform(28.0, 48.0, n)
    shape = (576, 832)  # level-5 grid
    args = (lon, lat, -167.276413, 5.499550, 0.008333 * 16, 40.0, 4.0)
    return (
        f"kde_accumulate ({n:,} pts, {shape[0]}x{shape[1]} grid)",
        timeit(lambda: _core.kde_accumulate(np.zeros(shape), *args), repeats) if _core else None,
        timeit(lambda: _fallback.kde_accumulate(np.zeros(shape), *args), repeats),
    )


def bench_fdeb(repeats):
    rng = np.random.default_rng(2)
    n_edges, n_pts = 120, 65
    pos = rng.uniform(0, 1, (n_edges, n_pts, 2))
    kp = rng.uniform(0.01, 0.2, n_edges)
    pairs = []
    rev = []
    for a in range(n_edges):
        for b in range(a + 1, n_edges):
            if (a + b) % 4 == 0:
                pairs.append((a, b))
                rev.append((a * b) % 2)
    pairs = np.array(pairs, dtype=np.int64)
    compat = rng.uniform(0.05, 1.0, len(pairs))
    rev = np.array(rev, dtype=np.uint8)

    def run(impl):
        p = pos.copy()
        for _ in range(25):
            p = impl.fdeb_iterate(p, kp, pairs, compat, rev, 0.04)
        return p

    return (
        f"fdeb_iterate x25 ({n_edges} edges, {n_pts} pts, {len(pairs)} pairs)",
        timeit(lambda: run(_core), repeats) if _core else None,
        timeit(lambda: run(_fallback), repeats),
    )


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeats", type=int, default=3)
    args = ap.parse_args()

    if _core is None:
        print("compiled core not built (pip install -e . builds it); timing fallback only\n")

    rows = [bench_grid(args.repeats), bench_kde(args.repeats), bench_fdeb(args.repeats)]
    width = max(len(r[0]) for r in rows)
    print(f"{'kernel':<{width}}  {'compiled':>10}  {'numpy':>10}  {'speedup':>8}")
    for name, t_core, t_np in rows:
        if t_core is None:
            print(f"{name:<{width}}  {'-':>10}  {t_np * 1e3:>8.2f}ms  {'-':>8}")
        else:
            print(
                f"{name:<{width}}  {t_core * 1e3:>8.2f}ms  {t_np * 1e3:>8.2f}ms  "
                f"{t_np / t_core:>7.1f}x"
            )


if __name__ == "__main__":
    main()
