"""Synthetic deterministic training-step kernel.

A step produces one 64-bit digest per participating device (16 hash lanes
folded per device), a scalar metric derived from the xor-fold of all digests,
and a wall-time cost supplied by the caller. Re-executing the same StepInput
is bit-identical, which is what makes replay-based corruption detection work.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import _backend
from ._bits import TWO64, device_digest

__all__ = [
    "StepInput",
    "StepOutcome",
    "ChecksumVector",
    "device_digest",
    "execute_step",
    "metric_of",
]


class ChecksumVector:
    """device id -> 64-bit digest, stored as parallel uint64 arrays."""

    __slots__ = ("device_ids", "digests")

    def __init__(self, device_ids: np.ndarray, digests: np.ndarray):
        self.device_ids = np.ascontiguousarray(device_ids, dtype=np.uint64)
        self.digests = np.ascontiguousarray(digests, dtype=np.uint64)
        if len(self.device_ids) != len(self.digests):
            raise ValueError("device_ids and digests must have equal length")

    def __len__(self) -> int:
        return len(self.device_ids)

    def __getitem__(self, device_id: int) -> int:
        idx = np.searchsorted(self.device_ids, np.uint64(device_id))
        if idx >= len(self.device_ids) or self.device_ids[idx] != np.uint64(device_id):
            raise KeyError(device_id)
        return int(self.digests[idx])

    def __eq__(self, other) -> bool:
        if not isinstance(other, ChecksumVector):
            return NotImplemented
        return (np.array_equal(self.device_ids, other.device_ids)
                and np.array_equal(self.digests, other.digests))

    def keys(self) -> list[int]:
        return [int(d) for d in self.device_ids]

    def items(self):
        for d, x in zip(self.device_ids, self.digests):
            yield int(d), int(x)

    def diff(self, other: "ChecksumVector") -> list[int]:
        """Device ids whose digests differ; participant sets must match."""
        if not np.array_equal(self.device_ids, other.device_ids):
            raise ValueError("checksum vectors cover different participant sets")
        mask = self.digests != other.digests
        return [int(d) for d in self.device_ids[mask]]

    def fold(self) -> int:
        return _backend.xor_fold(self.digests)


@dataclass(frozen=True)
class StepInput:
    run_seed: int
    step_index: int
    participant_devices: tuple[int, ...]
    corruption: frozenset[int] = field(default_factory=frozenset)

    def __post_init__(self):
        devices = tuple(self.participant_devices)
        object.__setattr__(self, "participant_devices", devices)
        if not devices:
            raise ValueError("participant_devices must be nonempty")
        if any(b <= a for a, b in zip(devices, devices[1:])):
            raise ValueError("participant_devices must be strictly ascending")
        corruption = frozenset(self.corruption)
        object.__setattr__(self, "corruption", corruption)
        if not corruption <= set(devices):
            raise ValueError("corruption names devices outside the participant set")


@dataclass(frozen=True)
class StepOutcome:
    checksums: ChecksumVector
    metric: float
    compute_cost: float


def compute_checksums(run_seed: int, step_index: int, device_ids: np.ndarray,
                      corruption: frozenset[int] | None = None) -> ChecksumVector:
    """Array-level digest computation (backend kernel); ids must be ascending."""
    ids = np.ascontiguousarray(device_ids, dtype=np.uint64)
    corrupted = None
    if corruption:
        corrupted = np.isin(ids, np.fromiter(corruption, dtype=np.uint64, count=len(corruption)))
    digests = _backend.digest_vector(run_seed, step_index, ids, corrupted)
    return ChecksumVector(ids, digests)


def execute_step(step: StepInput, step_seconds: float = 1.0) -> StepOutcome:
    """Run the deterministic kernel; wall cost is the caller's step duration."""
    ids = np.asarray(step.participant_devices, dtype=np.uint64)
    checksums = compute_checksums(step.run_seed, step.step_index, ids, step.corruption)
    return StepOutcome(checksums=checksums, metric=metric_of(checksums),
                       compute_cost=step_seconds)


def metric_of(checksums: ChecksumVector) -> float:
    """xor-fold of all digests mapped into [0, 1)."""
    if len(checksums) == 0:
        raise ValueError("checksum vector is empty")
    return checksums.fold() / TWO64


def fold_metric(fold: int) -> float:
    return (fold & 0xFFFFFFFFFFFFFFFF) / TWO64
