#!/usr/bin/env python3
"""Benchmark the Monte Carlo kernels: compiled extension vs pure Python.

Simulates a synthetic 64-team field with a 16-feature model and times
`run_iterations` under every available backend, verifying that the
outputs are bit-identical. A full-batch training fit is timed as well
for context (the training path is numpy-vectorized and shared by both
backends).

Usage:
    python benchmarks/bench_kernels.py [--iterations 2000] [--teams 64]
"""

import argparse
import time

import numpy as np

from bracketlab._kernels import available_backends
from bracketlab.dataio import PairExample
from bracketlab.linmodel import fit


def synthetic_field(n_teams: int, n_features: int, seed: int = 7):
    rng = np.random.default_rng(seed)
    feats = rng.normal(100.0, 10.0, size=(n_teams, n_features))
    means = rng.normal(0.0, 1.0, size=n_features)
    stds = rng.uniform(2.0, 12.0, size=n_features)
    coefs = rng.normal(0.0, 0.4, size=n_features)
    return feats, means, stds, coefs


def bench_simulation(iterations: int, n_teams: int) -> None:
    feats, means, stds, coefs = synthetic_field(n_teams, 16)
    backends = available_backends()
    results = {}
    outputs = {}
    for name, impl in sorted(backends.items()):
        impl.run_iterations(feats, means, stds, coefs, 0.0, 1, 10)  # warm up
        start = time.perf_counter()
        outputs[name] = impl.run_iterations(feats, means, stds, coefs, 0.0, 1, iterations)
        results[name] = time.perf_counter() - start

    games = iterations * (n_teams - 1)
    print(f"simulation: {iterations} iterations x {n_teams - 1} games "
          f"({games} games, 16 features)")
    for name, elapsed in sorted(results.items()):
        print(f"  {name:<9} {elapsed * 1e3:9.2f} ms   {games / elapsed / 1e6:7.2f} Mgames/s")
    if len(results) == 2:
        speedup = results["pure"] / results["compiled"]
        print(f"  speedup   {speedup:9.1f}x (compiled over pure)")
        identical = np.array_equal(outputs["pure"], outputs["compiled"])
        print(f"  outputs bit-identical: {identical}")
        if not identical:
            raise SystemExit("backend outputs diverged; kernels are out of sync")


def bench_training() -> None:
    rng = np.random.default_rng(11)
    X = rng.normal(size=(5000, 16))
    beta = rng.normal(0.0, 0.5, size=16)
    y = (rng.uniform(size=5000) < 1.0 / (1.0 + np.exp(-(X @ beta)))).astype(int)
    examples = [PairExample(x=X[i], y=int(y[i])) for i in range(len(y))]
    start = time.perf_counter()
    model = fit(examples, 0.01)
    elapsed = time.perf_counter() - start
    print(f"training: n=5000, p=16 -> {model.fit_meta.iterations} iterations "
          f"in {elapsed * 1e3:.1f} ms (numpy path, backend-independent)")


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--iterations", type=int, default=2000)
    parser.add_argument("--teams", type=int, default=64)
    args = parser.parse_args()
    available = ", ".join(sorted(available_backends()))
    print(f"available backends: {available}")
    bench_simulation(args.iterations, args.teams)
    bench_training()


if __name__ == "__main__":
    main()
