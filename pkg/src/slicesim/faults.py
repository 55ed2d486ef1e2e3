"""Reproducible fault traces and per-step stochastic effects.

Each event class (slice failures, SDC onsets, debug interventions) draws from
its own substream of the root seed, so changing one rate never perturbs
another class's event subsequence for the same seed.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, fields

from ._bits import (
    Stream,
    TAG_TRACE_DEBUG,
    TAG_TRACE_FAIL,
    TAG_TRACE_FAIL_PICK,
    TAG_TRACE_SDC,
    TAG_TRACE_SDC_PICK,
)
from .topology import ClusterTopology, DeviceState, FleetState


class FaultKind(enum.IntEnum):
    SLICE_FAILURE = 0
    SLICE_RECOVERED = 1
    SDC_ONSET = 2
    DEBUG_INTERVENTION = 3


@dataclass(frozen=True)
class FaultEvent:
    time: float
    kind: FaultKind
    slice_id: int | None = None
    device_id: int | None = None
    rollback_depth: int | None = None


@dataclass(frozen=True)
class FaultTrace:
    events: tuple[FaultEvent, ...]
    seed: int


@dataclass
class FaultRates:
    slice_failures_per_hour: float = 0.0
    slice_recovery_seconds: float = 600.0
    sdc_onsets_per_device_per_hour: float = 0.0
    sdc_corruption_prob_per_step: float = 0.0
    false_suspicion_prob_per_step: float = 0.0
    sdc_detect_prob_given_corruption: float = 1.0
    debug_interventions_per_day: float = 0.0
    debug_rollback_depth_steps: int = 1

    def validate(self, prefix: str = "faults") -> None:
        nonneg = ("slice_failures_per_hour", "sdc_onsets_per_device_per_hour",
                  "debug_interventions_per_day")
        probs = ("sdc_corruption_prob_per_step", "false_suspicion_prob_per_step",
                 "sdc_detect_prob_given_corruption")
        for name in nonneg:
            if getattr(self, name) < 0:
                raise ValueError(f"{prefix}.{name} must be >= 0")
        for name in probs:
            if not 0.0 <= getattr(self, name) <= 1.0:
                raise ValueError(f"{prefix}.{name} must be in [0, 1]")
        if self.slice_recovery_seconds <= 0:
            raise ValueError(f"{prefix}.slice_recovery_seconds must be > 0")
        if self.debug_rollback_depth_steps < 1:
            raise ValueError(f"{prefix}.debug_rollback_depth_steps must be >= 1")

    @classmethod
    def field_names(cls) -> list[str]:
        return [f.name for f in fields(cls)]


def _poisson_arrivals(stream: Stream, rate_per_second: float, horizon: float) -> list[float]:
    times: list[float] = []
    if rate_per_second <= 0.0:
        return times
    t = 0.0
    while True:
        t += stream.next_exponential(rate_per_second)
        if t >= horizon:
            return times
        times.append(t)


def sample_trace(rates: FaultRates, topology: ClusterTopology,
                 horizon_seconds: float, seed: int) -> FaultTrace:
    """Draw a full fault trace. Pure function of its arguments."""
    if horizon_seconds <= 0:
        raise ValueError("horizon_seconds must be > 0")
    rates.validate()

    events: list[FaultEvent] = []   # generation order; sorted stably below

    fail_gaps = Stream(seed, TAG_TRACE_FAIL)
    fail_picks = Stream(seed, TAG_TRACE_FAIL_PICK)
    for t in _poisson_arrivals(fail_gaps, rates.slice_failures_per_hour / 3600.0,
                               horizon_seconds):
        slice_id = fail_picks.next_below(topology.total_slices)
        events.append(FaultEvent(t, FaultKind.SLICE_FAILURE, slice_id=slice_id))
        recovery_t = t + rates.slice_recovery_seconds
        if recovery_t < horizon_seconds:
            events.append(FaultEvent(recovery_t, FaultKind.SLICE_RECOVERED,
                                     slice_id=slice_id))

    sdc_gaps = Stream(seed, TAG_TRACE_SDC)
    sdc_picks = Stream(seed, TAG_TRACE_SDC_PICK)
    fleet_rate = rates.sdc_onsets_per_device_per_hour * topology.total_devices / 3600.0
    for t in _poisson_arrivals(sdc_gaps, fleet_rate, horizon_seconds):
        device_id = sdc_picks.next_below(topology.total_devices)
        events.append(FaultEvent(t, FaultKind.SDC_ONSET, device_id=device_id))

    debug_gaps = Stream(seed, TAG_TRACE_DEBUG)
    for t in _poisson_arrivals(debug_gaps, rates.debug_interventions_per_day / 86400.0,
                               horizon_seconds):
        events.append(FaultEvent(t, FaultKind.DEBUG_INTERVENTION,
                                 rollback_depth=rates.debug_rollback_depth_steps))

    ordered = sorted(enumerate(events), key=lambda pair: (pair[1].time, pair[0]))
    return FaultTrace(events=tuple(e for _, e in ordered), seed=seed)


def corruption_for_step(fleet: FleetState, participants, rates: FaultRates,
                        step_stream: Stream) -> frozenset[int]:
    """Each SDC-prone participating device corrupts independently this step.

    Draws are addressed by device id within the step's corruption substream,
    matching the vectorized scan kernels bit for bit.
    """
    corrupted = set()
    for device_id in participants:
        if fleet.device_state(device_id) == DeviceState.SDC_PRONE:
            if step_stream.bernoulli_at(device_id, rates.sdc_corruption_prob_per_step):
                corrupted.add(device_id)
    return frozenset(corrupted)


def false_suspicion(rates: FaultRates, step_stream: Stream) -> bool:
    """Audit-style false alarm, independent of the corruption draws."""
    return step_stream.bernoulli_at(0, rates.false_suspicion_prob_per_step)
