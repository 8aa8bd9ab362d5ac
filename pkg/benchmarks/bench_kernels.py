#!/usr/bin/env python3
"""Benchmark the compiled kernels against the pure-Python fallback.

    python benchmarks/bench_kernels.py [--repeat N]

Covers the three hot loops: max-norm lattice reduction, geodesic miss
counting (the inner loop of the divergence-cover sweep), and integer IET
inverse-orbit generation (the inner loop of the partition engine).
"""

from __future__ import annotations

import argparse
import random
import time

from teichlab._kernels import _pure

try:
    from teichlab._kernels import _speedups
except ImportError:
    _speedups = None


def bench(label, fn, args_list, repeat):
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        for args in args_list:
            fn(*args)
        best = min(best, time.perf_counter() - t0)
    per_call = best / len(args_list)
    print(f"  {label:<12} {per_call * 1e6:9.2f} us/call")
    return per_call


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--repeat", type=int, default=5)
    args = parser.parse_args()

    rng = random.Random(42)
    bases = []
    while len(bases) < 20000:
        v = [rng.uniform(-4, 4) for _ in range(4)]
        if abs(v[0] * v[3] - v[1] * v[2]) > 1e-2:
            bases.append(v)

    cases = {
        "lattice_shortest_maxnorm": [tuple(v) for v in bases],
        "geodesic_miss_count": [tuple(v) + (12, 1.0, 0.45) for v in bases[:2000]],
        "iet_inverse_layers": [([3000, 10000], [7000, -3000], [2999], 2000)
                               for _ in range(20)],
    }

    for name, arg_list in cases.items():
        print(f"{name}:")
        pure_t = bench("pure", getattr(_pure, name), arg_list, args.repeat)
        if _speedups is None:
            print("  cython       (extension not built)")
            continue
        cy_t = bench("cython", getattr(_speedups, name), arg_list, args.repeat)
        print(f"  speedup      {pure_t / cy_t:9.1f}x")

    if _speedups is not None:
        sample = cases["lattice_shortest_maxnorm"][:500]
        mismatches = sum(_pure.lattice_shortest_maxnorm(*v)
                         != _speedups.lattice_shortest_maxnorm(*v) for v in sample)
        print(f"\nbit-identical on {len(sample) - mismatches}/{len(sample)} sampled inputs")


if __name__ == "__main__":
    main()
