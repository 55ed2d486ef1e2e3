"""Vectorized (numpy) implementations of the hot kernels.

Fallback backend used when the compiled extension is unavailable. All
arithmetic is uint64 with wraparound semantics and must match `_bits`
bit-for-bit; the backend equivalence tests enforce this. Scalar setup values
are computed with masked python ints because numpy warns on scalar uint64
overflow (array ops wrap silently).
"""

from __future__ import annotations

import numpy as np

from ._bits import DIGEST_LANES, K1, K2, K3, MASK64, mix64

BACKEND_NAME = "numpy"

_U = np.uint64
_M1 = _U(0xBF58476D1CE4E5B9)
_M2 = _U(0x94D049BB133111EB)
_K1 = _U(K1)
_K2 = _U(K2)


def _mix64(z: np.ndarray) -> np.ndarray:
    z = (z ^ (z >> _U(30))) * _M1
    z = (z ^ (z >> _U(27))) * _M2
    return z ^ (z >> _U(31))


def digest_vector(run_seed: int, step_index: int, device_ids: np.ndarray,
                  corrupted: np.ndarray | None = None) -> np.ndarray:
    """Per-device digests for one step; `corrupted` is a bool mask or None."""
    ids = np.ascontiguousarray(device_ids, dtype=np.uint64)
    seed_part = (int(run_seed) ^ (int(step_index) * K1)) & MASK64
    base = _U(seed_part) ^ (ids * _K2)
    x = np.zeros(len(ids), dtype=np.uint64)
    for lane in range(DIGEST_LANES):
        x = ((x << _U(7)) | (x >> _U(57))) ^ _mix64(base ^ _U(lane))
    if corrupted is not None and corrupted.any():
        flip = x ^ _mix64(x ^ _U(K3))
        x = np.where(corrupted, flip, x)
    return x


def _tag_state(seed: int, tag: int) -> int:
    return mix64((int(seed) ^ ((int(tag) * K1 + K3) & MASK64)) & MASK64)


def exec_draws(seed: int, tag: int, exec_start: int, count: int, draw_index: int) -> np.ndarray:
    """draw_u64(stream_state(seed, tag, e), draw_index) for e in [start, start+count)."""
    execs = np.arange(exec_start, exec_start + count, dtype=np.uint64)
    s0 = _U(_tag_state(seed, tag))
    state = _mix64(s0 ^ (execs * _K1 + _U(K3)))
    key = ((int(draw_index) + 1) * K2) & MASK64
    return _mix64(state ^ _U(key))


def device_draws(seed: int, tag: int, exec_index: int, device_ids: np.ndarray) -> np.ndarray:
    """Per-device draws within one execution's substream."""
    ids = np.ascontiguousarray(device_ids, dtype=np.uint64)
    s0 = _tag_state(seed, tag)
    state = mix64((s0 ^ ((int(exec_index) * K1 + K3) & MASK64)) & MASK64)
    return _mix64(_U(state) ^ ((ids + _U(1)) * _K2))


def xor_fold(digests: np.ndarray) -> int:
    arr = np.ascontiguousarray(digests, dtype=np.uint64)
    if len(arr) == 0:
        return 0
    return int(np.bitwise_xor.reduce(arr))
