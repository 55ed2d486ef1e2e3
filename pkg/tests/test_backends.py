"""The compiled and numpy kernel backends must agree bit for bit, and both
must agree with the scalar reference implementation."""

import json
import subprocess
import sys

import numpy as np
import pytest

from slicesim import _kernels_py
from slicesim._bits import (
    TAG_CORRUPT,
    device_digest,
    draw_u64,
    stream_state,
)

compiled = pytest.importorskip("slicesim._kernels")


def test_digest_vector_matches_compiled():
    rng = np.random.default_rng(1)
    ids = np.sort(rng.choice(2**40, size=5000, replace=False)).astype(np.uint64)
    corrupted = rng.random(5000) < 0.1
    for seed, step in [(0, 0), (2**64 - 1, 2**31), (12345, 67890)]:
        a = compiled.digest_vector(seed, step, ids, corrupted)
        b = _kernels_py.digest_vector(seed, step, ids, corrupted)
        assert np.array_equal(a, b)


def test_digest_vector_matches_scalar():
    ids = np.arange(64, dtype=np.uint64)
    corrupted = np.zeros(64, dtype=bool)
    corrupted[7] = True
    for backend in (compiled, _kernels_py):
        out = backend.digest_vector(99, 123, ids, corrupted)
        for i, device in enumerate(ids):
            assert int(out[i]) == device_digest(99, 123, int(device), bool(corrupted[i]))


def test_exec_draws_match():
    for seed, tag, start, n, idx in [(7, 1, 0, 10000, 0), (2**63, 2, 10**9, 777, 42)]:
        a = compiled.exec_draws(seed, tag, start, n, idx)
        b = _kernels_py.exec_draws(seed, tag, start, n, idx)
        assert np.array_equal(a, b)
        for offset in (0, n // 2, n - 1):
            expected = draw_u64(stream_state(seed, tag, start + offset), idx)
            assert int(a[offset]) == expected


def test_device_draws_match():
    ids = np.array([0, 1, 5, 2**33, 2**40], dtype=np.uint64)
    a = compiled.device_draws(9, TAG_CORRUPT, 314159, ids)
    b = _kernels_py.device_draws(9, TAG_CORRUPT, 314159, ids)
    assert np.array_equal(a, b)
    for i, device in enumerate(ids):
        assert int(a[i]) == draw_u64(stream_state(9, TAG_CORRUPT, 314159), int(device))


def test_xor_fold_matches():
    rng = np.random.default_rng(2)
    arr = rng.integers(0, 2**63, size=999, dtype=np.int64).astype(np.uint64)
    assert compiled.xor_fold(arr) == _kernels_py.xor_fold(arr)
    expected = 0
    for v in arr.tolist():
        expected ^= v
    assert compiled.xor_fold(arr) == expected


def test_full_run_identical_across_backends():
    # Backend choice happens at import, so the fallback runs in a subprocess.
    program = """
import json
from slicesim.controller import run_training
from slicesim.faults import FaultRates
from slicesim.topology import build_topology
import slicesim
topo = build_topology(1, 2, 8, 4)
rates = FaultRates(slice_failures_per_hour=4.0, slice_recovery_seconds=600.0,
                   sdc_onsets_per_device_per_hour=0.002,
                   sdc_corruption_prob_per_step=0.5,
                   false_suspicion_prob_per_step=0.002,
                   sdc_detect_prob_given_corruption=0.9,
                   debug_interventions_per_day=12.0,
                   debug_rollback_depth_steps=25)
from slicesim.controller import ControllerConfig
ledger, report = run_training(ControllerConfig(tail_failure_prob=0.1), rates,
                              topo, 43200.0, 11)
digests = [r.checksum_digest for r in ledger.records[:200]]
print(json.dumps({"backend": slicesim.BACKEND,
                  "compute": report.compute_seconds,
                  "steps": report.steps_computed,
                  "suspicions": report.suspicions,
                  "rolled_back": report.steps_rolled_back,
                  "digests": digests}))
"""
    import os
    results = {}
    for backend in ("cython", "numpy"):
        env = dict(os.environ)
        env.pop("SLICESIM_BACKEND", None)
        if backend == "numpy":
            env["SLICESIM_BACKEND"] = "numpy"
        proc = subprocess.run([sys.executable, "-c", program],
                              capture_output=True, text=True, env=env,
                              check=True)
        results[backend] = json.loads(proc.stdout)
    assert results["cython"]["backend"] == "cython"
    assert results["numpy"]["backend"] == "numpy"
    a, b = results["cython"], results["numpy"]
    del a["backend"], b["backend"]
    assert a == b
