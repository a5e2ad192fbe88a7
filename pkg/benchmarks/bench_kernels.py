#!/usr/bin/env python3
"""Benchmark the hot kernels on both backends (numba jit vs numpy fallback).

Usage: python benchmarks/bench_kernels.py [--repeats N]

The jit path is warmed up before timing so compilation is excluded.
"""

from __future__ import annotations

import argparse
import os
import statistics
import time

import numpy as np


def time_call(fn, repeats: int) -> float:
    samples = []
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        samples.append(time.perf_counter() - t0)
    return statistics.median(samples)


def bench_backend(backend: str, repeats: int) -> dict[str, float]:
    os.environ["GHZ3D_NUMBA"] = "1" if backend == "numba" else "0"
    # re-import under the chosen backend; kernels read the env at call time
    from ghz3d import _kernels as k
    from ghz3d import spectral as sp

    if backend == "numba" and not k.HAVE_NUMBA:
        raise SystemExit("numba not importable; install ghz3d[accel]")

    results: dict[str, float] = {}

    k.lr_scan()  # warm-up (jit compilation on the numba path)
    results["lr_scan (3^9 assignments)"] = time_call(k.lr_scan, repeats)

    model = sp.SpectralModel.reference_defaults()
    sp.p4_numeric(model, 0.7e-12, order=48, check=False)  # warm-up

    def quadrature():
        sp.p4_numeric(model, 0.7e-12, order=48, check=False)

    results["p4_numeric (order 48)"] = time_call(quadrature, repeats)

    def dip_curve():
        for dt in np.linspace(-2e-12, 2e-12, 21):
            sp.p4_numeric(model, float(dt), order=24, check=False)

    results["p4 dip curve (21 points, order 24)"] = time_call(dip_curve, repeats)
    return results


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--repeats", type=int, default=7)
    args = parser.parse_args()

    all_results: dict[str, dict[str, float]] = {}
    for backend in ("numpy", "numba"):
        try:
            all_results[backend] = bench_backend(backend, args.repeats)
        except SystemExit as exc:
            print(f"[{backend}] skipped: {exc}")

    names = sorted({name for r in all_results.values() for name in r})
    width = max(len(n) for n in names) + 2
    header = f"{'kernel':<{width}}" + "".join(f"{b:>14}" for b in all_results)
    print(header)
    print("-" * len(header))
    for name in names:
        row = f"{name:<{width}}"
        for backend in all_results:
            t = all_results[backend].get(name)
            row += f"{t * 1e3:>11.2f} ms" if t is not None else f"{'-':>14}"
        print(row)
    if {"numpy", "numba"} <= set(all_results):
        print()
        for name in names:
            ratio = all_results["numpy"][name] / all_results["numba"][name]
            print(f"speedup {name}: {ratio:.1f}x")


if __name__ == "__main__":
    main()
