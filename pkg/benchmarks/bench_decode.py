#!/usr/bin/env python3
"""Benchmark the pure-NumPy decode kernel against the compiled one.

Runs the iterative decode on frames matching the paper-scale operating
points and prints per-frame timings and the speedup.

    python benchmarks/bench_decode.py [--repeats 20]
"""

import argparse
import time

import numpy as np

from bloomsig import kernels
from bloomsig.codec import build_codebook
from bloomsig.dimensioning import DimensioningInput, dimension
from bloomsig.ormac import ChannelParams


def make_frame(N, T=1000, M=54, seed=0):
    res = dimension(DimensioningInput(N=N, T=T, M=M, G_hat=0.99))
    codebook = build_codebook(range(T), res.L_hat, M, res.K)
    codes = codebook.packed_rows()
    rng = np.random.default_rng(seed)
    transmit = rng.choice(T, size=N, replace=False)
    grid = np.zeros((res.L_hat, M), dtype=np.uint8)
    rows = np.arange(res.L_hat)
    for c in transmit:
        mask = codes[c] >= 0
        grid[rows[mask], codes[c][mask]] = 1
    u = rng.random(grid.shape)
    y = np.where(grid > 0, u < 0.99, u < 1e-3).astype(np.uint8)
    return codes, y, res


def bench(fn, codes, y, repeats):
    fn(codes, y)  # warm up
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn(codes, y)
        best = min(best, time.perf_counter() - t0)
    return best


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--repeats", type=int, default=20)
    args = parser.parse_args()

    names = kernels.available_kernels()
    print(f"kernels available: {', '.join(names)}")
    for N in (200, 500, 900):
        codes, y, res = make_frame(N)
        timings = {}
        for name in names:
            timings[name] = bench(kernels.get_kernel(name), codes, y, args.repeats)
        line = f"N={N:>3} (K={res.K}, L={res.L_hat}): " + "  ".join(
            f"{name}={1e3 * t:7.3f} ms" for name, t in timings.items()
        )
        if "compiled" in timings and "pure" in timings:
            line += f"  speedup={timings['pure'] / timings['compiled']:5.1f}x"
        print(line)


if __name__ == "__main__":
    main()
