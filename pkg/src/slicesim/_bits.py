"""Scalar 64-bit mixing primitives and counter-based random streams.

Everything stochastic or checksum-shaped in the simulator reduces to the
splitmix64 finalizer applied to counter-derived inputs, so identical seeds
reproduce identical runs on any backend. The vectorized kernels in
``_kernels_py`` / ``_kernels`` implement the same formulas element-wise and
are cross-checked against this module in the test suite.
"""

from __future__ import annotations

import math

MASK64 = 0xFFFFFFFFFFFFFFFF

K1 = 0x9E3779B97F4A7C15
K2 = 0xC2B2AE3D27D4EB4F
K3 = 0x165667B19E3779F9

DIGEST_LANES = 16

# Stream class tags. Trace classes are independent so that changing one fault
# rate cannot perturb another class's event subsequence for the same seed.
TAG_JUDGE = 1
TAG_CORRUPT = 2
TAG_STRAGGLER = 3
TAG_TAIL = 4
TAG_TRACE_FAIL = 5
TAG_TRACE_FAIL_PICK = 6
TAG_TRACE_SDC = 7
TAG_TRACE_SDC_PICK = 8
TAG_TRACE_DEBUG = 9

TWO64 = float(2**64)


def mix64(z: int) -> int:
    """splitmix64 finalizer (bijective 64-bit mix)."""
    z &= MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


def rotl(x: int, r: int) -> int:
    x &= MASK64
    return ((x << r) | (x >> (64 - r))) & MASK64


def device_digest(run_seed: int, step_index: int, device_id: int, corrupted: bool = False) -> int:
    """Per-device 64-bit digest of one step's intermediate values.

    16 hash lanes folded by x <- rotl(x, 7) ^ lane; a corrupted device gets a
    final self-keyed xor so its digest differs from the clean one while
    remaining deterministic. Bit-exact by construction.
    """
    base = (run_seed ^ (step_index * K1) ^ (device_id * K2)) & MASK64
    x = 0
    for lane in range(DIGEST_LANES):
        x = rotl(x, 7) ^ mix64(base ^ lane)
    if corrupted:
        x ^= mix64(x ^ K3)
    return x


def absorb(state: int, value: int) -> int:
    return mix64(state ^ ((value * K1 + K3) & MASK64))


def stream_state(seed: int, tag: int, index: int) -> int:
    """State of the (class tag, index) substream of a root seed."""
    return absorb(absorb(seed & MASK64, tag), index)


def draw_u64(state: int, draw_index: int) -> int:
    return mix64(state ^ (((draw_index + 1) * K2) & MASK64))


def u01(word: int) -> float:
    """Map a 64-bit word to [0, 1) with full float53 resolution."""
    return (word >> 11) * (1.0 / (1 << 53))


def bernoulli(state: int, draw_index: int, prob: float) -> bool:
    if prob <= 0.0:
        return False
    if prob >= 1.0:
        return True
    return draw_u64(state, draw_index) < prob_threshold(prob)


def prob_threshold(prob: float) -> int:
    """u64 threshold such that P[draw < threshold] == prob (up to 2^-64)."""
    return min(MASK64, int(prob * TWO64))


class Stream:
    """View over one substream; draws are either sequential or index-addressed.

    Index-addressed draws (``*_at``) are what the vectorized kernels compute,
    so scalar operations that must agree with them draw by explicit index.
    """

    def __init__(self, seed: int, tag: int, index: int = 0):
        self.state = stream_state(seed, tag, index)
        self._next = 0

    def u64_at(self, draw_index: int) -> int:
        return draw_u64(self.state, draw_index)

    def u01_at(self, draw_index: int) -> float:
        return u01(draw_u64(self.state, draw_index))

    def bernoulli_at(self, draw_index: int, prob: float) -> bool:
        return bernoulli(self.state, draw_index, prob)

    def next_u64(self) -> int:
        word = draw_u64(self.state, self._next)
        self._next += 1
        return word

    def next_u01(self) -> float:
        return u01(self.next_u64())

    def next_exponential(self, rate_per_second: float) -> float:
        """Gap to the next Poisson arrival at the given rate."""
        u = self.next_u01()
        return -math.log1p(-u) / rate_per_second

    def next_bernoulli(self, prob: float) -> bool:
        word = self.next_u64()
        if prob <= 0.0:
            return False
        if prob >= 1.0:
            return True
        return word < prob_threshold(prob)

    def next_below(self, bound: int) -> int:
        """Uniform integer in [0, bound) (floor of u01*bound; bias < 2^-53)."""
        return min(bound - 1, int(self.next_u01() * bound))
