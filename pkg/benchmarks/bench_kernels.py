"""Compare the compiled and numpy demand-aggregation kernels.

Usage: python benchmarks/bench_kernels.py [n_cells] [repeats]

Prints per-backend timings for one aggregation pass over a random OD
density and the maximum elementwise disagreement between the two.
"""

from __future__ import annotations

import sys
import time

import numpy as np

from gridtransit._kernels import accumulate_od, available_backends


def bench(n: int, repeats: int) -> None:
    rng = np.random.default_rng(7)
    density = rng.random((n, n, n, n))
    cell = 10.0 / n
    backends = available_backends()
    print(f"n_cells={n} ({n ** 4} OD pairs), repeats={repeats}")
    results = {}
    for name, available in sorted(backends.items()):
        if not available:
            print(f"  {name:>8}: not available")
            continue
        accumulate_od(density, cell, backend=name)  # warm up
        started = time.perf_counter()
        for _ in range(repeats):
            out = accumulate_od(density, cell, backend=name)
        elapsed = (time.perf_counter() - started) / repeats
        results[name] = out
        print(f"  {name:>8}: {elapsed * 1e3:8.2f} ms/pass")
    if len(results) == 2:
        worst = max(
            float(np.max(np.abs(a - b)))
            for a, b in zip(results["compiled"], results["numpy"])
        )
        print(f"  max |compiled - numpy| = {worst:.3e}")


if __name__ == "__main__":
    n = int(sys.argv[1]) if len(sys.argv) > 1 else 20
    repeats = int(sys.argv[2]) if len(sys.argv) > 2 else 5
    bench(n, repeats)
