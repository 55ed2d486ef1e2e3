#!/usr/bin/env python3
"""Benchmark the hot kernels: compiled extension vs numpy fallback.

Also times an end-to-end 30-day default-fleet run per backend (subprocesses,
because the backend is fixed at import time).

Usage: python benchmarks/bench_kernels.py [--repeats N] [--skip-e2e]
"""

import argparse
import os
import subprocess
import sys
import time

import numpy as np

from slicesim import _kernels_py

try:
    from slicesim import _kernels
except ImportError:
    _kernels = None

FLEET = 26880          # default topology: 3 pods x 32 slices x 280 devices
DRAWS = 1_000_000

E2E_PROGRAM = """
import time
from slicesim.controller import ControllerConfig, run_training
from slicesim.faults import FaultRates
from slicesim.topology import build_topology
import slicesim
topo = build_topology(1, 3, 32, 280)
rates = FaultRates(slice_failures_per_hour=4.16, slice_recovery_seconds=600.0,
                   sdc_onsets_per_device_per_hour=1.84e-6,
                   sdc_corruption_prob_per_step=0.3,
                   false_suspicion_prob_per_step=0.00229,
                   sdc_detect_prob_given_corruption=0.9,
                   debug_interventions_per_day=2.26,
                   debug_rollback_depth_steps=100)
t0 = time.perf_counter()
run_training(ControllerConfig(tail_failure_prob=0.0476), rates, topo,
             30 * 86400.0, 20250801)
print(f"{slicesim.BACKEND} {time.perf_counter() - t0:.3f}")
"""


def best_of(repeats, fn):
    best = float("inf")
    for _ in range(repeats):
        start = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - start)
    return best


def bench_backend(backend, repeats):
    ids = np.arange(FLEET, dtype=np.uint64)
    corrupted = np.zeros(FLEET, dtype=bool)
    corrupted[123] = True
    rows = {}
    rows["digest_vector (26880 devices)"] = best_of(
        repeats, lambda: backend.digest_vector(7, 1000, ids, corrupted))
    rows["exec_draws (1e6 steps)"] = best_of(
        repeats, lambda: backend.exec_draws(7, 1, 0, DRAWS, 0))
    rows["device_draws (26880 devices)"] = best_of(
        repeats, lambda: backend.device_draws(7, 3, 55, ids))
    rows["xor_fold (26880 digests)"] = best_of(
        repeats, lambda: backend.xor_fold(ids))
    return rows


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--repeats", type=int, default=5)
    parser.add_argument("--skip-e2e", action="store_true")
    args = parser.parse_args()

    backends = {"numpy": _kernels_py}
    if _kernels is not None:
        backends["cython"] = _kernels
    else:
        print("compiled extension not available; benchmarking numpy only")

    results = {name: bench_backend(mod, args.repeats)
               for name, mod in backends.items()}

    kernels = list(next(iter(results.values())))
    width = max(len(k) for k in kernels)
    header = f"{'kernel':<{width}}  " + "  ".join(f"{n:>10}" for n in results)
    if len(results) == 2:
        header += "  speedup"
    print(header)
    print("-" * len(header))
    for kernel in kernels:
        line = f"{kernel:<{width}}  " + "  ".join(
            f"{results[n][kernel] * 1e3:9.3f}ms" for n in results)
        if len(results) == 2:
            line += f"  {results['numpy'][kernel] / results['cython'][kernel]:6.1f}x"
        print(line)

    if not args.skip_e2e:
        print()
        print("end-to-end: one 30-day default-fleet run")
        for name in backends:
            env = dict(os.environ)
            if name == "numpy":
                env["SLICESIM_BACKEND"] = "numpy"
            else:
                env.pop("SLICESIM_BACKEND", None)
            proc = subprocess.run([sys.executable, "-c", E2E_PROGRAM],
                                  capture_output=True, text=True, env=env,
                                  check=True)
            backend, seconds = proc.stdout.split()
            print(f"  {backend:>7}: {float(seconds):.2f}s")


if __name__ == "__main__":
    main()
