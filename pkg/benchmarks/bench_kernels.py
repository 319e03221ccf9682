#!/usr/bin/env python3
"""Benchmark the numba kernel path against the pure-numpy fallback.

Times the greedy sweep that dominates every value-iteration style loop in
the package, on a generated instance. The first numba call compiles and is
excluded via warmup.

    python benchmarks/bench_kernels.py --n 300 --saps 8 --steps 400
"""

import argparse
import time

import numpy as np

from mdpgeom import kernels
from mdpgeom.generate import GeneratorSpec, SplitMix64, generate_model, uniform_vector
from mdpgeom.geometry import mdp_constant


def time_backend(model, v0, steps, backend):
    c = mdp_constant(model)
    scale = model.gamma / c
    v = v0.copy()
    kernels.greedy_sweep_model(model, scale, v, backend=backend)  # warmup/compile
    start = time.perf_counter()
    for _ in range(steps):
        maxq, _ = kernels.greedy_sweep_model(model, scale, v, backend=backend)
        v = c * maxq - model.gamma * float(v.sum())
        v -= v.mean()
    elapsed = time.perf_counter() - start
    return elapsed, v


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--n", type=int, default=300)
    parser.add_argument("--saps", type=int, default=8)
    parser.add_argument("--gamma", type=float, default=0.95)
    parser.add_argument("--steps", type=int, default=400)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()

    spec = GeneratorSpec(
        n=args.n, saps_per_state=args.saps, gamma=args.gamma, seed=args.seed
    )
    model = generate_model(spec).model
    v0 = uniform_vector(SplitMix64(args.seed), args.n)

    print(
        f"model: n={args.n}, saps/state={args.saps}, gamma={args.gamma}, "
        f"steps={args.steps}"
    )
    results = {}
    for backend in kernels.available_backends():
        elapsed, v_final = time_backend(model, v0, args.steps, backend)
        results[backend] = (elapsed, v_final)
        rate = args.steps / elapsed
        print(f"  {backend:>6}: {elapsed:8.3f}s   {rate:10.1f} sweeps/s")

    if {"numba", "numpy"} <= results.keys():
        t_nb, v_nb = results["numba"]
        t_np, v_np = results["numpy"]
        drift = float(np.max(np.abs(v_nb - v_np)))
        print(f"  speedup numba vs numpy: {t_np / t_nb:5.2f}x   max |dv| = {drift:.3e}")


if __name__ == "__main__":
    main()
