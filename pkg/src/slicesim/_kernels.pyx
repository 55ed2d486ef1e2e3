# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled implementations of the hot kernels (see _kernels_py for the
reference semantics). Scalar C loops; no numpy C-API dependency."""

import numpy as np

from libc.stdint cimport uint64_t, uint8_t

BACKEND_NAME = "cython"

cdef uint64_t _K1 = 0x9E3779B97F4A7C15U
cdef uint64_t _K2 = 0xC2B2AE3D27D4EB4FU
cdef uint64_t _K3 = 0x165667B19E3779F9U
cdef int _LANES = 16


cdef inline uint64_t _mix64(uint64_t z) nogil:
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9U
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBU
    return z ^ (z >> 31)


cdef inline uint64_t _rotl7(uint64_t x) nogil:
    return (x << 7) | (x >> 57)


def digest_vector(run_seed, step_index, device_ids, corrupted=None):
    """Per-device digests for one step; `corrupted` is a bool mask or None."""
    ids_arr = np.ascontiguousarray(device_ids, dtype=np.uint64)
    cdef uint64_t[::1] ids = ids_arr
    cdef Py_ssize_t n = ids.shape[0]
    out_arr = np.empty(n, dtype=np.uint64)
    cdef uint64_t[::1] out = out_arr
    cdef uint64_t seed = <uint64_t> (int(run_seed) & 0xFFFFFFFFFFFFFFFF)
    cdef uint64_t step = <uint64_t> (int(step_index) & 0xFFFFFFFFFFFFFFFF)
    cdef uint64_t base, x
    cdef Py_ssize_t i
    cdef int lane
    cdef uint8_t[::1] corr
    cdef bint has_corr = corrupted is not None

    if has_corr:
        corr_arr = np.ascontiguousarray(corrupted, dtype=np.uint8)
        corr = corr_arr
        with nogil:
            for i in range(n):
                base = seed ^ (step * _K1) ^ (ids[i] * _K2)
                x = 0
                for lane in range(_LANES):
                    x = _rotl7(x) ^ _mix64(base ^ <uint64_t> lane)
                if corr[i]:
                    x ^= _mix64(x ^ _K3)
                out[i] = x
    else:
        with nogil:
            for i in range(n):
                base = seed ^ (step * _K1) ^ (ids[i] * _K2)
                x = 0
                for lane in range(_LANES):
                    x = _rotl7(x) ^ _mix64(base ^ <uint64_t> lane)
                out[i] = x
    return out_arr


def exec_draws(seed, tag, exec_start, count, draw_index):
    """draw_u64(stream_state(seed, tag, e), draw_index) for a range of e."""
    cdef Py_ssize_t n = count
    out_arr = np.empty(n, dtype=np.uint64)
    cdef uint64_t[::1] out = out_arr
    cdef uint64_t s = <uint64_t> (int(seed) & 0xFFFFFFFFFFFFFFFF)
    cdef uint64_t t = <uint64_t> (int(tag) & 0xFFFFFFFFFFFFFFFF)
    cdef uint64_t e0 = <uint64_t> (int(exec_start) & 0xFFFFFFFFFFFFFFFF)
    cdef uint64_t di = <uint64_t> (int(draw_index) & 0xFFFFFFFFFFFFFFFF)
    cdef uint64_t s0 = _mix64(s ^ (t * _K1 + _K3))
    cdef uint64_t key = (di + 1) * _K2
    cdef uint64_t state
    cdef Py_ssize_t i
    with nogil:
        for i in range(n):
            state = _mix64(s0 ^ ((e0 + <uint64_t> i) * _K1 + _K3))
            out[i] = _mix64(state ^ key)
    return out_arr


def device_draws(seed, tag, exec_index, device_ids):
    """Per-device draws within one execution's substream."""
    ids_arr = np.ascontiguousarray(device_ids, dtype=np.uint64)
    cdef uint64_t[::1] ids = ids_arr
    cdef Py_ssize_t n = ids.shape[0]
    out_arr = np.empty(n, dtype=np.uint64)
    cdef uint64_t[::1] out = out_arr
    cdef uint64_t s = <uint64_t> (int(seed) & 0xFFFFFFFFFFFFFFFF)
    cdef uint64_t t = <uint64_t> (int(tag) & 0xFFFFFFFFFFFFFFFF)
    cdef uint64_t e = <uint64_t> (int(exec_index) & 0xFFFFFFFFFFFFFFFF)
    cdef uint64_t s0 = _mix64(s ^ (t * _K1 + _K3))
    cdef uint64_t state = _mix64(s0 ^ (e * _K1 + _K3))
    cdef Py_ssize_t i
    with nogil:
        for i in range(n):
            out[i] = _mix64(state ^ ((ids[i] + 1) * _K2))
    return out_arr


def xor_fold(digests):
    arr = np.ascontiguousarray(digests, dtype=np.uint64)
    cdef uint64_t[::1] d = arr
    cdef uint64_t acc = 0
    cdef Py_ssize_t i
    with nogil:
        for i in range(d.shape[0]):
            acc ^= d[i]
    return int(acc)
