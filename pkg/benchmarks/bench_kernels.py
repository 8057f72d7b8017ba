#!/usr/bin/env python3
"""Benchmark the compiled conv kernels against the pure-numpy fallback.

Runs forward, grad-input and grad-weight for the conv shapes the denoiser
and encoders actually use, and prints GFLOP/s per backend. The crossover
seen here sets the wide-reduction cutoff in chatbrush.nn.kernels.

Usage: python benchmarks/bench_kernels.py [--batch 16] [--iters 5]
"""
import argparse
import time

import numpy as np

from chatbrush.nn import kernels_numpy

try:
    from chatbrush.nn import _kernels_cy
except ImportError:
    _kernels_cy = None

SHAPES = [
    # (cin, h, cout, k, stride) — denoiser stem/blocks, encoder convs
    (6, 64, 16, 3, 1),
    (16, 64, 16, 3, 1),
    (16, 64, 32, 3, 2),
    (32, 32, 32, 3, 1),
    (32, 32, 64, 3, 2),
    (64, 16, 64, 3, 1),
    (128, 16, 64, 3, 1),
    (3, 64, 32, 3, 2),
]


def bench(mod, x, w, stride, iters):
    pad = w.shape[2] // 2
    y = mod.conv2d_forward(x, w, stride, pad)
    gy = np.ascontiguousarray(y)
    t0 = time.perf_counter()
    for _ in range(iters):
        mod.conv2d_forward(x, w, stride, pad)
    fwd = (time.perf_counter() - t0) / iters
    t0 = time.perf_counter()
    for _ in range(iters):
        mod.conv2d_grad_input(gy, w, x.shape, stride, pad)
        mod.conv2d_grad_weight(gy, x, w.shape, stride, pad)
    bwd = (time.perf_counter() - t0) / iters
    return fwd, bwd, y


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--batch", type=int, default=16)
    ap.add_argument("--iters", type=int, default=5)
    args = ap.parse_args()

    rng = np.random.default_rng(0)
    backends = [("numpy", kernels_numpy)]
    if _kernels_cy is not None:
        backends.insert(0, ("cython", _kernels_cy))
    else:
        print("compiled extension not built; benchmarking numpy only")

    header = f"{'shape':>24s}" + "".join(f"  {n} fwd GF/s  {n} bwd GF/s" for n, _ in backends)
    print(header)
    for cin, h, cout, k, stride in SHAPES:
        x = rng.normal(size=(args.batch, cin, h, h)).astype(np.float32)
        w = rng.normal(size=(cout, cin, k, k)).astype(np.float32)
        ho = (h + 2 * (k // 2) - k) // stride + 1
        flops = 2 * args.batch * cout * ho * ho * cin * k * k
        row = f"{cin:4d}->{cout:<4d}@{h:2d} s{stride}      "
        outputs = []
        for _, mod in backends:
            fwd, bwd, y = bench(mod, x, w, stride, args.iters)
            outputs.append(y)
            row += f"  {flops / fwd / 1e9:10.1f}  {2 * flops / bwd / 1e9:10.1f}"
        if len(outputs) == 2:
            rel = np.abs(outputs[0] - outputs[1]).max() / max(np.abs(outputs[1]).max(), 1e-12)
            row += f"   (max rel diff {rel:.1e})"
        print(row)


if __name__ == "__main__":
    main()
