"""Single global controller: synchronous step loop, slice elasticity,
split-phase SDC detection, rollback, and the verified-step ledger.

The run is driven by a sparse event queue (fault events plus controller
events); quiet stretches between events execute as batched step windows with
vectorized per-step suspicion/corruption scans. Fault events take effect at
the next step boundary, matching synchronous-training barrier semantics.
"""

from __future__ import annotations

import bisect
import enum
import math
from dataclasses import dataclass, field

import numpy as np

from . import _backend
from ._bits import (
    MASK64,
    Stream,
    TAG_CORRUPT,
    TAG_JUDGE,
    TAG_STRAGGLER,
    TAG_TAIL,
    prob_threshold,
)
from .engine import EventQueue, SimClock
from .faults import FaultEvent, FaultKind, FaultRates, FaultTrace, sample_trace
from .metrics import GoodputReport
from .topology import ClusterTopology, DeviceState, FleetState, SliceState
from .workload import ChecksumVector, StepInput, StepOutcome, compute_checksums, fold_metric

TIME_EPS = 1e-6

# Straggler probe jitter: uniform [0,0.2) plus a rare +3x spike, built from
# integer field extraction only so both kernel backends agree bit-for-bit.
_SPIKE_THRESHOLD = 7            # of 65536 -> ~1.07e-4 per device per probe
_PROBE_INTERVAL_CHECKPOINTS = 10


class InternalConsistencyError(RuntimeError):
    """Controller-internal invariant violated (programming bug)."""


class Mode(enum.Enum):
    ELASTIC = "elastic"
    NON_ELASTIC_BASELINE = "non_elastic_baseline"


class SdcMode(enum.Enum):
    SPLIT_PHASE = "split_phase"
    LEGACY_DELAYED = "legacy_delayed"


class StepStatus(enum.IntEnum):
    COMPUTED = 0
    SUSPECTED = 1
    REPLAYED_FALSE_ALARM = 2
    REPLAYED_GENUINE = 3
    ROLLED_BACK = 4


class SuspicionCause(enum.Enum):
    METRIC_ANOMALY = "metric_anomaly"
    AUDIT_SAMPLE = "audit_sample"
    NONE = "none"


class RollbackReason(enum.Enum):
    SDC_LEGACY = "sdc_legacy"
    DEBUG_INTERVENTION = "debug_intervention"


@dataclass
class ControllerConfig:
    mode: Mode = Mode.ELASTIC
    sdc_mode: SdcMode = SdcMode.SPLIT_PHASE
    base_step_seconds: float = 10.0
    reconfig_seconds: float = 30.0
    tail_failure_prob: float = 0.0
    reschedule_seconds: float = 600.0
    checkpoint_interval_steps: int = 100
    legacy_detection_delay_seconds: float = 14400.0
    straggler_threshold_ratio: float = 2.0

    def validate(self, prefix: str = "controller") -> None:
        if not isinstance(self.mode, Mode):
            raise ValueError(f"{prefix}.mode must be one of "
                             f"{[m.value for m in Mode]}")
        if not isinstance(self.sdc_mode, SdcMode):
            raise ValueError(f"{prefix}.sdc_mode must be one of "
                             f"{[m.value for m in SdcMode]}")
        for name in ("base_step_seconds", "reconfig_seconds", "reschedule_seconds"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{prefix}.{name} must be > 0")
        if not 0.0 <= self.tail_failure_prob <= 1.0:
            raise ValueError(f"{prefix}.tail_failure_prob must be in [0, 1]")
        if self.checkpoint_interval_steps < 1:
            raise ValueError(f"{prefix}.checkpoint_interval_steps must be >= 1")
        # The type table says > 0, but the degenerate-delay behavior is specified,
        # so 0 is accepted.
        if self.legacy_detection_delay_seconds < 0:
            raise ValueError(f"{prefix}.legacy_detection_delay_seconds must be >= 0")
        if self.straggler_threshold_ratio <= 1.0:
            raise ValueError(f"{prefix}.straggler_threshold_ratio must be > 1")


@dataclass(frozen=True)
class SuspicionVerdict:
    suspected: bool
    cause: SuspicionCause


@dataclass(frozen=True)
class ReplayOutcome:
    genuine: bool
    localized_devices: frozenset[int]
    recompute_count: int


def step_duration(config: ControllerConfig, healthy: int, total: int) -> float:
    """Synchronous step duration when `healthy` of `total` slices carry the work."""
    if not 1 <= healthy <= total:
        raise ValueError(f"healthy must be in [1, total], got {healthy}/{total}")
    return config.base_step_seconds * total / healthy


def judge_step(outcome: StepOutcome | None, corruption_was_injected: bool,
               rates: FaultRates, step_stream: Stream) -> SuspicionVerdict:
    """Suspicion draw for one executed step.

    Detection is probabilistic: ground truth feeds only this draw. The
    outcome's metric carries no threshold semantics (hash-derived).
    """
    if corruption_was_injected:
        if step_stream.bernoulli_at(0, rates.sdc_detect_prob_given_corruption):
            return SuspicionVerdict(True, SuspicionCause.METRIC_ANOMALY)
        return SuspicionVerdict(False, SuspicionCause.NONE)
    if step_stream.bernoulli_at(0, rates.false_suspicion_prob_per_step):
        return SuspicionVerdict(True, SuspicionCause.AUDIT_SAMPLE)
    return SuspicionVerdict(False, SuspicionCause.NONE)


def replay_and_localize(replay_input: StepInput, original: StepOutcome) -> ReplayOutcome:
    """Deterministic replay plus per-device checksum comparison.

    genuine=true iff any device's digest differs between original and replay;
    the differing keys localize the fault exactly.
    """
    ids = np.asarray(replay_input.participant_devices, dtype=np.uint64)
    if not np.array_equal(ids, original.checksums.device_ids):
        raise InternalConsistencyError("replay participant set differs from original")
    replay_checksums = compute_checksums(replay_input.run_seed, replay_input.step_index,
                                         ids, replay_input.corruption)
    localized = original.checksums.diff(replay_checksums)
    genuine = bool(localized)
    return ReplayOutcome(genuine=genuine, localized_devices=frozenset(localized),
                         recompute_count=1 if genuine else 0)


def detect_stragglers(per_device_step_seconds: dict[int, float],
                      threshold_ratio: float) -> set[int]:
    """Devices slower than threshold_ratio x median; tracking only."""
    if not per_device_step_seconds:
        raise ValueError("per_device_step_seconds must be nonempty")
    durations = np.fromiter(per_device_step_seconds.values(), dtype=np.float64)
    cutoff = threshold_ratio * float(np.median(durations))
    return {device for device, seconds in per_device_step_seconds.items()
            if seconds > cutoff}


class ParticipantSet:
    """Interned view of one (healthy slices, excluded devices) configuration."""

    __slots__ = ("key", "healthy_slices", "excluded", "healthy_count",
                 "bottleneck_healthy", "pod_total", "participant_count",
                 "_topology", "_device_ids")

    def __init__(self, topology: ClusterTopology, down_slices: frozenset[int],
                 excluded: tuple[int, ...]):
        self.key = (down_slices, excluded)
        self._topology = topology
        self.healthy_slices = tuple(s for s in range(topology.total_slices)
                                    if s not in down_slices)
        self.excluded = excluded
        self.healthy_count = len(self.healthy_slices)
        per_pod = [topology.slices_per_pod] * topology.total_pods
        for s in down_slices:
            per_pod[s // topology.slices_per_pod] -= 1
        self.pod_total = topology.slices_per_pod
        self.bottleneck_healthy = min(per_pod) if per_pod else 0
        excluded_in_healthy = sum(
            1 for d in excluded
            if (d // topology.devices_per_slice) not in down_slices)
        self.participant_count = (self.healthy_count * topology.devices_per_slice
                                  - excluded_in_healthy)
        self._device_ids = None

    @property
    def stalled(self) -> bool:
        return self.bottleneck_healthy == 0 or self.participant_count == 0

    @property
    def device_ids(self) -> np.ndarray:
        if self._device_ids is None:
            topo = self._topology
            dps = topo.devices_per_slice
            blocks = [np.arange(s * dps, (s + 1) * dps, dtype=np.uint64)
                      for s in self.healthy_slices]
            ids = np.concatenate(blocks) if blocks else np.empty(0, dtype=np.uint64)
            if self.excluded:
                drop = np.fromiter(self.excluded, dtype=np.uint64, count=len(self.excluded))
                ids = ids[~np.isin(ids, drop)]
            self._device_ids = ids
        return self._device_ids

    def participates(self, device_id: int) -> bool:
        topo = self._topology
        slice_id = device_id // topo.devices_per_slice
        return slice_id not in self.key[0] and device_id not in self.key[1]


class StepRecord:
    """Lazy view over one ledger row; checksums materialize on access."""

    __slots__ = ("_ledger", "_row")

    def __init__(self, ledger: "RunLedger", row: int):
        self._ledger = ledger
        self._row = row

    @property
    def step_index(self) -> int:
        return self._ledger.col_step[self._row]

    @property
    def wall_start(self) -> float:
        return self._ledger.col_start[self._row]

    @property
    def wall_end(self) -> float:
        return self._ledger.col_end[self._row]

    @property
    def status(self) -> StepStatus:
        return StepStatus(self._ledger.col_status[self._row])

    @property
    def verified(self) -> bool:
        return bool(self._ledger.col_verified[self._row])

    @property
    def corruption(self) -> frozenset[int]:
        return frozenset(self._ledger.corrupt_masks.get(self._row, ()))

    @property
    def participants(self) -> np.ndarray:
        pset = self._ledger.psets[self._ledger.col_pset[self._row]]
        return pset.device_ids

    def checksums(self) -> ChecksumVector:
        return compute_checksums(self._ledger.run_seed, self.step_index,
                                 self.participants, self.corruption)

    @property
    def checksum_digest(self) -> int:
        cached = self._ledger.fold_cache.get(self._row)
        if cached is None:
            cached = self.checksums().fold()
            self._ledger.fold_cache[self._row] = cached
        return cached

    @property
    def metric(self) -> float:
        return fold_metric(self.checksum_digest)


class _RecordsView:
    def __init__(self, ledger: "RunLedger"):
        self._ledger = ledger

    def __len__(self) -> int:
        return len(self._ledger.col_step)

    def __getitem__(self, row: int) -> StepRecord:
        if isinstance(row, slice):
            return [StepRecord(self._ledger, i)
                    for i in range(*row.indices(len(self)))]
        if row < 0:
            row += len(self)
        if not 0 <= row < len(self):
            raise IndexError(row)
        return StepRecord(self._ledger, row)

    def __iter__(self):
        for i in range(len(self)):
            yield StepRecord(self._ledger, i)


@dataclass
class RunLedger:
    """Append-only global view: step rows, checkpoints, exclusions, pauses."""

    run_seed: int
    topology: ClusterTopology
    col_step: list[int] = field(default_factory=list)
    col_exec: list[int] = field(default_factory=list)
    col_pset: list[int] = field(default_factory=list)
    col_start: list[float] = field(default_factory=list)
    col_end: list[float] = field(default_factory=list)
    col_status: list[int] = field(default_factory=list)
    col_verified: list[bool] = field(default_factory=list)
    corrupt_masks: dict[int, tuple[int, ...]] = field(default_factory=dict)
    psets: list[ParticipantSet] = field(default_factory=list)
    checkpoints: list[int] = field(default_factory=lambda: [0])
    excluded_devices: list[tuple[int, float]] = field(default_factory=list)
    straggler_counts: dict[int, int] = field(default_factory=dict)
    warnings: dict[str, int] = field(default_factory=dict)
    pauses: list[tuple[float, float, str, int]] = field(default_factory=list)
    fold_cache: dict[int, int] = field(default_factory=dict)

    @property
    def records(self) -> _RecordsView:
        return _RecordsView(self)

    def warn(self, key: str) -> None:
        self.warnings[key] = self.warnings.get(key, 0) + 1

    def core_state(self) -> dict:
        """Digest-free run state for determinism comparisons."""
        return {
            "step": list(self.col_step),
            "exec": list(self.col_exec),
            "pset": list(self.col_pset),
            "start": list(self.col_start),
            "end": list(self.col_end),
            "status": list(self.col_status),
            "verified": list(self.col_verified),
            "corrupt_masks": dict(self.corrupt_masks),
            "checkpoints": list(self.checkpoints),
            "excluded_devices": list(self.excluded_devices),
            "straggler_counts": dict(self.straggler_counts),
            "warnings": dict(self.warnings),
            "pauses": list(self.pauses),
        }

    def timeline_rows(self, horizon_seconds: float):
        """(start, end, bucket, healthy_slices, step_index|None), time-ordered."""
        rows = []
        for i in range(len(self.col_step)):
            pset = self.psets[self.col_pset[i]]
            rows.append((self.col_start[i], self.col_end[i], "compute",
                         pset.healthy_count, self.col_step[i]))
        rows.extend((start, end, bucket, healthy, None)
                    for start, end, bucket, healthy in self.pauses)
        rows.sort(key=lambda r: (r[0], r[1]))
        end_of_work = max((r[1] for r in rows), default=0.0)
        if end_of_work < horizon_seconds - TIME_EPS:
            healthy = rows[-1][3] if rows else self.topology.total_slices
            rows.append((end_of_work, horizon_seconds, "idle", healthy, None))
        return rows


def exclude_device(ledger: RunLedger, fleet: FleetState, device_id: int,
                   now: float) -> bool:
    """Absorbing exclusion; repeat exclusions are counted no-ops."""
    if fleet.exclude_device(device_id, now):
        ledger.excluded_devices.append((device_id, now))
        return True
    ledger.warn("double_exclusions")
    return False


def _threshold_mask(words: np.ndarray, prob: float) -> np.ndarray:
    if prob <= 0.0:
        return np.zeros(len(words), dtype=bool)
    if prob >= 1.0:
        return np.ones(len(words), dtype=bool)
    return words < np.uint64(prob_threshold(prob))


class TrainingRun:
    """One deterministic simulation of the controller over a fault trace."""

    def __init__(self, config: ControllerConfig, rates: FaultRates,
                 topology: ClusterTopology, horizon_seconds: float, seed: int,
                 trace: FaultTrace | None = None):
        config.validate()
        rates.validate()
        if horizon_seconds <= 0:
            raise ValueError("horizon_seconds must be > 0")
        self.config = config
        self.rates = rates
        self.topology = topology
        self.horizon = float(horizon_seconds)
        self.seed = seed & MASK64
        self.trace = trace if trace is not None else sample_trace(
            rates, topology, horizon_seconds, seed)

        self.fleet = FleetState(topology)
        self.ledger = RunLedger(run_seed=self.seed, topology=topology)
        self.clock = SimClock()
        self.queue = EventQueue()
        for event in self.trace.events:
            self.queue.push(event.time, event)

        self.k = 0                      # next forward step index
        self.execs = 0                  # global execution counter (drives streams)
        self.live_row: dict[int, int] = {}
        self.down_slices: set[int] = set()
        self.excluded: list[int] = []   # sorted
        self.active_sdc: dict[int, float] = {}   # device -> onset time
        self.onset_step: dict[int, int] = {}

        self._pset_cache: dict[tuple, int] = {}
        self._pset_dirty = True
        self._pset_id = -1

        self.compute_seconds = 0.0
        self.reconfig_seconds = 0.0
        self.tail_seconds = 0.0
        self.resched_seconds = 0.0

        self.suspicions = 0
        self.replays = 0
        self.genuine = 0
        self.interruptions = 0
        self.rolled_back = 0
        self.silent_rows: set[int] = set()
        self.detection_latencies: list[float] = []

        self._pending_failures: list[int] = []
        self._pending_rejoins: list[int] = []
        self._pending_interventions: list[int] = []
        self._pending_detections: list[int] = []
        self._probe_interval = (config.checkpoint_interval_steps
                                * _PROBE_INTERVAL_CHECKPOINTS)
        self._detect_threshold = rates.sdc_detect_prob_given_corruption
        self._false_threshold = rates.false_suspicion_prob_per_step

    # -- fleet / participant bookkeeping ------------------------------------

    def _current_pset(self) -> ParticipantSet:
        if self._pset_dirty:
            key = (frozenset(self.down_slices), tuple(self.excluded))
            pset_id = self._pset_cache.get(key)
            if pset_id is None:
                pset = ParticipantSet(self.topology, key[0], key[1])
                self.ledger.psets.append(pset)
                pset_id = len(self.ledger.psets) - 1
                self._pset_cache[key] = pset_id
            self._pset_id = pset_id
            self._pset_dirty = False
        return self.ledger.psets[self._pset_id]

    def _active_participating_sdc(self, pset: ParticipantSet) -> list[int]:
        return [d for d in sorted(self.active_sdc) if pset.participates(d)]

    # -- named controller operations ----------------------------------------

    def handle_slice_failure(self, slice_id: int) -> None:
        """Pay the interruption at the current barrier and attribute its bucket."""
        ordinal = self.interruptions
        self.interruptions += 1
        now = self.clock.now
        if self.config.mode == Mode.ELASTIC:
            tail = Stream(self.seed, TAG_TAIL, ordinal).bernoulli_at(
                0, self.config.tail_failure_prob)
            if tail:
                self._pay_pause(self.config.reschedule_seconds, "tail")
                # Slice stays down; its trace recovery event rejoins it.
            else:
                self._pay_pause(self.config.reconfig_seconds, "reconfig")
                if self.fleet.slice_state(slice_id) == SliceState.FAILED:
                    self.fleet.start_recovery(slice_id, self.clock.now)
        else:
            self._pay_pause(self.config.reschedule_seconds, "baseline_reschedule")
            # Rescheduling waits for a full healthy pool: restore the slice.
            if self.fleet.slice_state(slice_id) in (SliceState.FAILED, SliceState.RECOVERING):
                self.fleet.recover_slice(slice_id, self.clock.now)
                self.down_slices.discard(slice_id)
                self._pset_dirty = True

    def handle_slice_recovery(self, slice_id: int) -> None:
        """Rejoin a recovered slice at the current barrier."""
        state = self.fleet.slice_state(slice_id)
        if state == SliceState.HEALTHY:
            self.ledger.warn("ignored_recoveries")
            return
        self.fleet.recover_slice(slice_id, self.clock.now)
        self.down_slices.discard(slice_id)
        self._pset_dirty = True

    def rollback(self, to_checkpoint: int, reason: RollbackReason) -> int:
        """Mark rows after the checkpoint rolled back; recomputation follows."""
        if to_checkpoint not in self.ledger.checkpoints:
            raise ValueError(f"unknown checkpoint {to_checkpoint}")
        if to_checkpoint > self.k:
            raise ValueError(f"checkpoint {to_checkpoint} is after step {self.k}")
        recompute_count = self.k - to_checkpoint
        for idx in range(to_checkpoint, self.k):
            row = self.live_row.get(idx)
            if row is None or self.ledger.col_status[row] == StepStatus.ROLLED_BACK:
                continue
            self.ledger.col_status[row] = int(StepStatus.ROLLED_BACK)
            self.ledger.col_verified[row] = False
            self.silent_rows.discard(row)
            self.rolled_back += 1
        self.k = to_checkpoint
        return recompute_count

    def legacy_sdc_flow(self, device_id: int) -> int:
        """Delayed detection: exclude the device, roll back past the onset."""
        if self.fleet.device_state(device_id) != DeviceState.SDC_PRONE:
            return 0
        now = self.clock.now
        onset = self.active_sdc.pop(device_id, None)
        exclude_device(self.ledger, self.fleet, device_id, now)
        bisect.insort(self.excluded, device_id)
        self._pset_dirty = True
        if onset is not None:
            self.detection_latencies.append(now - onset)
        target = self.onset_step.pop(device_id, 0)
        # A prior rollback may already have moved the cursor behind the onset
        # checkpoint; never roll forward.
        target = min(target, self.k)
        cp_idx = bisect.bisect_right(self.ledger.checkpoints, target) - 1
        to_checkpoint = self.ledger.checkpoints[max(cp_idx, 0)]
        return self.rollback(to_checkpoint, RollbackReason.SDC_LEGACY)

    # -- time accounting -----------------------------------------------------

    def _pay_pause(self, seconds: float, bucket: str) -> None:
        start = self.clock.now
        end = min(start + seconds, self.horizon)
        span = end - start
        if span <= 0:
            return
        if bucket == "reconfig":
            self.reconfig_seconds += span
        elif bucket == "tail":
            self.tail_seconds += span
        else:
            self.resched_seconds += span
        healthy = self.topology.total_slices - len(self.down_slices)
        self.ledger.pauses.append((start, end, bucket, healthy))
        self.clock.advance_to(end)

    # -- event processing ----------------------------------------------------

    def _dispatch(self, event) -> None:
        payload = event.payload
        if isinstance(payload, FaultEvent):
            fault = payload
            if fault.kind == FaultKind.SLICE_FAILURE:
                if self.fleet.slice_state(fault.slice_id) != SliceState.HEALTHY:
                    self.ledger.warn("ignored_failures")
                    return
                # Transitions apply at the barrier; `since` uses barrier time.
                self.fleet.fail_slice(fault.slice_id, max(fault.time, self.clock.now))
                self.down_slices.add(fault.slice_id)
                self._pset_dirty = True
                self._pending_failures.append(fault.slice_id)
            elif fault.kind == FaultKind.SLICE_RECOVERED:
                self._pending_rejoins.append(fault.slice_id)
            elif fault.kind == FaultKind.SDC_ONSET:
                device = fault.device_id
                if not self.fleet.mark_sdc_prone(device, fault.time):
                    self.ledger.warn("ignored_onsets")
                    return
                self.active_sdc[device] = fault.time
                self.onset_step[device] = self.k
                if self.config.sdc_mode == SdcMode.LEGACY_DELAYED:
                    detect_at = fault.time + self.config.legacy_detection_delay_seconds
                    if detect_at < self.horizon:
                        self.queue.push(detect_at, ("legacy_detect", device))
            elif fault.kind == FaultKind.DEBUG_INTERVENTION:
                self._pending_interventions.append(fault.rollback_depth)
        elif isinstance(payload, tuple) and payload[0] == "legacy_detect":
            self._pending_detections.append(payload[1])

    def _process_barrier(self) -> None:
        """Drain due events and settle pending work; loops until stable."""
        while True:
            progressed = False
            while True:
                next_time = self.queue.peek_time()
                if next_time is None or next_time > self.clock.now + TIME_EPS:
                    break
                event = self.queue.pop_next(self.clock)
                self._dispatch(event)
                progressed = True
            if self._pending_rejoins:
                for slice_id in self._pending_rejoins:
                    self.handle_slice_recovery(slice_id)
                self._pending_rejoins.clear()
            if self._pending_detections:
                for device in self._pending_detections:
                    self.legacy_sdc_flow(device)
                self._pending_detections.clear()
                progressed = True
            if self._pending_interventions:
                for depth in self._pending_interventions:
                    target = max(self.k - depth, 0)
                    cp_idx = bisect.bisect_right(self.ledger.checkpoints, target) - 1
                    to_checkpoint = self.ledger.checkpoints[max(cp_idx, 0)]
                    self.rollback(to_checkpoint, RollbackReason.DEBUG_INTERVENTION)
                self._pending_interventions.clear()
                progressed = True
            if self._pending_failures:
                pending, self._pending_failures = self._pending_failures, []
                for slice_id in pending:
                    self.handle_slice_failure(slice_id)
                    if self.clock.now >= self.horizon - TIME_EPS:
                        break
                progressed = True
            if not progressed or self.clock.now >= self.horizon - TIME_EPS:
                return

    # -- step windows ----------------------------------------------------------

    def _commit_rows(self, count: int, duration: float, pset_id: int,
                     corrupt_at: dict[int, tuple[int, ...]] | None = None) -> None:
        """Append `count` forward Computed rows starting at the current barrier."""
        ledger = self.ledger
        t0 = self.clock.now
        k0 = self.k
        row0 = len(ledger.col_step)
        starts = t0 + np.arange(count, dtype=np.float64) * duration
        ledger.col_step.extend(range(k0, k0 + count))
        ledger.col_exec.extend(range(self.execs, self.execs + count))
        ledger.col_pset.extend([pset_id] * count)
        ledger.col_start.extend(starts.tolist())
        ledger.col_end.extend((starts + duration).tolist())
        ledger.col_status.extend([int(StepStatus.COMPUTED)] * count)
        verified = [True] * count
        if corrupt_at:
            for offset, mask in corrupt_at.items():
                verified[offset] = False
                row = row0 + offset
                ledger.corrupt_masks[row] = mask
                self.silent_rows.add(row)
        ledger.col_verified.extend(verified)
        self.live_row.update(zip(range(k0, k0 + count), range(row0, row0 + count)))

        interval = self.config.checkpoint_interval_steps
        last_cp = ledger.checkpoints[-1]
        first_cp = (k0 // interval + 1) * interval
        for cp in range(first_cp, k0 + count + 1, interval):
            if cp > last_cp:
                ledger.checkpoints.append(cp)
                last_cp = cp

        first_probe = (k0 // self._probe_interval + 1) * self._probe_interval
        for probe_step in range(first_probe, k0 + count + 1, self._probe_interval):
            self._straggler_probe(self.execs + (probe_step - k0) - 1,
                                  self.ledger.psets[pset_id])

        self.k += count
        self.execs += count
        advance = count * duration
        self.compute_seconds += advance
        self.clock.advance_to(t0 + advance)

    def _straggler_probe(self, exec_index: int, pset: ParticipantSet) -> None:
        ids = pset.device_ids
        words = _backend.device_draws(self.seed, TAG_STRAGGLER, exec_index, ids)
        base = self.config.base_step_seconds
        jitter = ((words >> np.uint64(16)) & np.uint64(0xFFFF)).astype(np.float64)
        durations = base * (1.0 + jitter * (0.2 / 65536.0))
        spikes = (words & np.uint64(0xFFFF)) < np.uint64(_SPIKE_THRESHOLD)
        if spikes.any():
            durations = durations + np.where(spikes, 3.0 * base, 0.0)
        cutoff = self.config.straggler_threshold_ratio * float(np.median(durations))
        for device in ids[durations > cutoff]:
            device = int(device)
            self.ledger.straggler_counts[device] = (
                self.ledger.straggler_counts.get(device, 0) + 1)

    def _corruption_mask(self, exec_index: int, candidates: list[int]) -> tuple[int, ...]:
        prob = self.rates.sdc_corruption_prob_per_step
        if not candidates or prob <= 0.0:
            return ()
        stream = Stream(self.seed, TAG_CORRUPT, exec_index)
        return tuple(d for d in candidates if stream.bernoulli_at(d, prob))

    def _execute_window(self, pset: ParticipantSet) -> bool:
        """Run steps until the next event barrier, a suspicion, or the horizon.

        Returns False when no further step fits before the horizon.
        """
        duration = self.config.base_step_seconds * pset.pod_total / pset.bottleneck_healthy
        t = self.clock.now
        n_fit = math.floor((self.horizon - t) / duration + 1e-9)
        if n_fit <= 0:
            return False
        next_time = self.queue.peek_time()
        if next_time is None:
            n = n_fit
        else:
            n = min(n_fit, max(1, math.ceil((next_time - t) / duration - 1e-9)))

        active = self._active_participating_sdc(pset)
        split_phase = self.config.sdc_mode == SdcMode.SPLIT_PHASE

        corrupt_by_dev: dict[int, np.ndarray] = {}
        any_corrupt = None
        if active and self.rates.sdc_corruption_prob_per_step > 0.0:
            for device in active:
                words = _backend.exec_draws(self.seed, TAG_CORRUPT, self.execs, n, device)
                mask = _threshold_mask(words, self.rates.sdc_corruption_prob_per_step)
                corrupt_by_dev[device] = mask
                any_corrupt = mask if any_corrupt is None else (any_corrupt | mask)

        if split_phase:
            judge_words = _backend.exec_draws(self.seed, TAG_JUDGE, self.execs, n, 0)
            suspected = _threshold_mask(judge_words, self._false_threshold)
            if any_corrupt is not None:
                detected = _threshold_mask(judge_words, self._detect_threshold)
                suspected = np.where(any_corrupt, detected, suspected)
            hits = np.nonzero(suspected)[0]
            first_suspect = int(hits[0]) if len(hits) else n
        else:
            first_suspect = n

        def corrupt_offsets(limit: int) -> dict[int, tuple[int, ...]]:
            if any_corrupt is None:
                return {}
            offsets = np.nonzero(any_corrupt[:limit])[0]
            return {
                int(i): tuple(d for d in active if corrupt_by_dev[d][i])
                for i in offsets
            }

        if first_suspect > 0:
            self._commit_rows(first_suspect, duration, self._pset_id,
                              corrupt_offsets(first_suspect))
        if first_suspect == n:
            return True

        original_mask = tuple(d for d in active
                              if corrupt_by_dev.get(d) is not None
                              and corrupt_by_dev[d][first_suspect])
        self._handle_suspicion(duration, original_mask)
        return True

    def _handle_suspicion(self, duration: float, original_mask: tuple[int, ...]) -> None:
        """Split-phase flow: replay, compare checksums, localize, recompute."""
        ledger = self.ledger
        pset_id = self._pset_id
        pset = ledger.psets[pset_id]
        step_index = self.k
        start = self.clock.now
        self.suspicions += 1

        row = len(ledger.col_step)
        ledger.col_step.append(step_index)
        ledger.col_exec.append(self.execs)
        ledger.col_pset.append(pset_id)
        ledger.col_start.append(start)
        ledger.col_status.append(int(StepStatus.SUSPECTED))
        ledger.col_verified.append(False)
        if original_mask:
            ledger.corrupt_masks[row] = original_mask
            self.silent_rows.add(row)
        self.live_row[step_index] = row
        self.k += 1
        self.execs += 1
        self.compute_seconds += duration
        self.clock.advance_to(start + duration)

        self._maybe_checkpoint_and_probe(row)

        if self.clock.now + duration > self.horizon + TIME_EPS:
            ledger.col_end.append(self.clock.now)     # replay does not fit
            return

        replay_exec = self.execs
        self.execs += 1
        self.replays += 1
        self.compute_seconds += duration
        self.clock.advance_to(self.clock.now + duration)

        candidates = self._active_participating_sdc(pset)
        replay_mask = self._corruption_mask(replay_exec, candidates)

        if set(replay_mask) == set(original_mask):
            # Deterministic workload: equal corruption state => equal checksums.
            ledger.col_status[row] = int(StepStatus.REPLAYED_FALSE_ALARM)
            ledger.col_verified[row] = True
            ledger.col_end.append(self.clock.now)
            return

        ids = pset.device_ids
        original_checksums = compute_checksums(self.seed, step_index, ids,
                                               frozenset(original_mask))
        replay_checksums = compute_checksums(self.seed, step_index, ids,
                                             frozenset(replay_mask))
        localized = original_checksums.diff(replay_checksums)
        self.genuine += 1
        now = self.clock.now
        for device in localized:
            if exclude_device(ledger, self.fleet, device, now):
                bisect.insort(self.excluded, device)
                onset = self.active_sdc.pop(device, None)
                self.onset_step.pop(device, None)
                if onset is not None:
                    self.detection_latencies.append(now - onset)
        self._pset_dirty = True
        new_pset = self._current_pset()
        new_pset_id = self._pset_id

        if now + duration > self.horizon + TIME_EPS or new_pset.stalled:
            ledger.col_end.append(now)                # recompute does not fit
            return

        recompute_exec = self.execs
        self.execs += 1
        self.compute_seconds += duration
        self.clock.advance_to(now + duration)
        recompute_mask = self._corruption_mask(
            recompute_exec, self._active_participating_sdc(new_pset))

        ledger.col_status[row] = int(StepStatus.REPLAYED_GENUINE)
        ledger.col_verified[row] = True
        ledger.col_pset[row] = new_pset_id
        ledger.col_end.append(self.clock.now)
        self.silent_rows.discard(row)
        if recompute_mask:
            ledger.corrupt_masks[row] = recompute_mask
            self.silent_rows.add(row)
        elif row in ledger.corrupt_masks:
            del ledger.corrupt_masks[row]

    def _maybe_checkpoint_and_probe(self, row: int) -> None:
        interval = self.config.checkpoint_interval_steps
        if self.k % interval == 0 and self.k > self.ledger.checkpoints[-1]:
            self.ledger.checkpoints.append(self.k)
        if self.k % self._probe_interval == 0:
            self._straggler_probe(self.ledger.col_exec[row],
                                  self.ledger.psets[self.ledger.col_pset[row]])

    def _stall(self) -> None:
        """No pod has a healthy slice: pay full-reschedule time to the next event."""
        next_time = self.queue.peek_time()
        until = min(next_time if next_time is not None else self.horizon, self.horizon)
        bucket = "tail" if self.config.mode == Mode.ELASTIC else "baseline_reschedule"
        span = until - self.clock.now
        if span <= 0:
            # Nothing can unblock the run; burn the rest of the horizon.
            until = self.horizon
            span = until - self.clock.now
        if span > 0:
            if bucket == "tail":
                self.tail_seconds += span
            else:
                self.resched_seconds += span
            healthy = self.topology.total_slices - len(self.down_slices)
            self.ledger.pauses.append((self.clock.now, until, bucket, healthy))
            self.clock.advance_to(until)

    # -- main loop -------------------------------------------------------------

    def run(self) -> tuple[RunLedger, GoodputReport]:
        while True:
            self._process_barrier()
            if self.clock.now >= self.horizon - TIME_EPS:
                break
            pset = self._current_pset()
            if pset.stalled:
                self._stall()
                continue
            if not self._execute_window(pset):
                break
        idle = max(self.horizon - self.clock.now, 0.0)
        report = GoodputReport(
            seed=self.seed,
            horizon_seconds=self.horizon,
            compute_seconds=self.compute_seconds,
            reconfig_seconds_total=self.reconfig_seconds,
            tail_seconds_total=self.tail_seconds,
            baseline_reschedule_seconds_total=self.resched_seconds,
            idle_residual_seconds=idle,
            steps_computed=self.execs,
            steps_replayed=self.replays,
            steps_rolled_back=self.rolled_back,
            genuine_sdc_incidents=self.genuine,
            suspicions=self.suspicions,
            silent_corruptions=len(self.silent_rows),
            interruptions=self.interruptions,
            mean_detection_latency_seconds=(
                sum(self.detection_latencies) / len(self.detection_latencies)
                if self.detection_latencies else 0.0),
            straggler_observations=sum(self.ledger.straggler_counts.values()),
        )
        return self.ledger, report


def run_training(config: ControllerConfig, rates: FaultRates,
                 topology: ClusterTopology, horizon_seconds: float, seed: int,
                 trace: FaultTrace | None = None) -> tuple[RunLedger, GoodputReport]:
    """Simulate one run; (ledger, report) is a pure function of the arguments."""
    return TrainingRun(config, rates, topology, horizon_seconds, seed, trace).run()
