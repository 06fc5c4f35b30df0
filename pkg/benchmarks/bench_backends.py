#!/usr/bin/env python3
"""Benchmark the compiled kernel core against the pure-numpy fallback.

Covers the training-path rollout kernels (forward and backward) and the
int8 inference primitives. Usage:

    python benchmarks/bench_backends.py [--reps 50]
"""

import argparse
import time

import numpy as np

from sohcast import backend
from sohcast.rng import make_rng


def timeit(fn, reps):
    fn()  # warm up
    times = []
    for _ in range(reps):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return float(np.median(times)) * 1e3


def bench(reps):
    impls = backend.backends()
    rng = make_rng(0)
    rows = []

    B, d, r, K = 64, 128, 4, 8
    h0 = rng.normal(size=(B, d)).astype(np.float32)
    u = rng.normal(size=(B, d)).astype(np.float32)
    wd = (rng.normal(size=d) * 0.3).astype(np.float32)
    U = rng.normal(size=(d, r)).astype(np.float32)
    V = rng.normal(size=(d, r)).astype(np.float32)
    g = rng.normal(size=(B, d)).astype(np.float32)

    for name, mod in impls.items():
        rows.append((f"euler_fwd B={B} d={d} r={r} K={K}", name, timeit(
            lambda: mod.euler_fwd(h0, wd, U, V, r, 1.0, 0.9, 0.125, K, u, False), reps)))
        _, saved = mod.euler_fwd(h0, wd, U, V, r, 1.0, 0.9, 0.125, K, u, True)
        rows.append((f"euler_bwd B={B} d={d} r={r} K={K}", name, timeit(
            lambda: mod.euler_bwd(saved, wd, U, V, r, 1.0, 0.9, 0.125, K, g), reps)))

    W = (rng.normal(size=(d, d)) / np.sqrt(d)).astype(np.float32)
    steps = 20
    for name, mod in impls.items():
        rows.append((f"rk4_fwd B={B} d={d} steps={steps}", name, timeit(
            lambda: mod.rk4_fwd(h0, W, 1.0, 0.9, 0.05, steps, u, False), reps)))
        _, saved = mod.rk4_fwd(h0, W, 1.0, 0.9, 0.05, steps, u, True)
        rows.append((f"rk4_bwd B={B} d={d} steps={steps}", name, timeit(
            lambda: mod.rk4_bwd(saved, W, 1.0, 0.9, 0.05, steps, g), reps)))

    n_in, n_out = 256, 256
    xq = rng.integers(-128, 128, n_in).astype(np.int8)
    wq = rng.integers(-127, 128, (n_out, n_in)).astype(np.int8)
    bias = rng.normal(size=n_out).astype(np.float32)
    hq = rng.normal(size=d)
    wd64, U64, V64 = wd.astype(np.float64), U.astype(np.float64), V.astype(np.float64)
    for name, mod in impls.items():
        rows.append((f"qlinear {n_in}x{n_out}", name, timeit(
            lambda: mod.qlinear(xq, -3, 0.01, wq, 0.005, bias, 0.02, 7), reps)))
        rows.append((f"qeuler d={d} r={r} K={K}", name, timeit(
            lambda: mod.qeuler(hq, wd64, U64, V64, r, 1.0, 0.9, 0.125, K, 0.7), reps)))

    width = max(len(r[0]) for r in rows)
    print(f"{'kernel':<{width}}  {'backend':<9} {'median ms':>10}")
    base = {}
    for kernel, name, ms in rows:
        base.setdefault(kernel, {})[name] = ms
    for kernel in dict.fromkeys(k for k, _, _ in rows):
        for name, ms in base[kernel].items():
            speedup = ""
            if name == "compiled" and "fallback" in base[kernel]:
                speedup = f"  ({base[kernel]['fallback'] / ms:.1f}x vs fallback)"
            print(f"{kernel:<{width}}  {name:<9} {ms:>10.3f}{speedup}")


if __name__ == "__main__":
    ap = argparse.ArgumentParser()
    ap.add_argument("--reps", type=int, default=50)
    bench(ap.parse_args().reps)
