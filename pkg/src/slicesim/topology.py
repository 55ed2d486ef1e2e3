"""Accelerator fleet model: datacenters > pods > slices > devices.

Topology counts are immutable after construction; only per-entity health
state changes, and only through the transition methods on FleetState (which
enforce the legal state machines).
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field


class ConfigurationError(ValueError):
    """Invalid configuration value; message names the offending field."""


class TransitionError(RuntimeError):
    """Illegal health-state transition."""


@dataclass(frozen=True)
class ClusterTopology:
    datacenters: int
    pods_per_datacenter: int
    slices_per_pod: int
    devices_per_slice: int

    @property
    def total_pods(self) -> int:
        return self.datacenters * self.pods_per_datacenter

    @property
    def total_slices(self) -> int:
        return self.total_pods * self.slices_per_pod

    @property
    def total_devices(self) -> int:
        return self.total_slices * self.devices_per_slice

    @property
    def pod_size(self) -> int:
        """Devices per pod."""
        return self.slices_per_pod * self.devices_per_slice

    def slice_of(self, device_id: int) -> int:
        if not 0 <= device_id < self.total_devices:
            raise IndexError(f"unknown device id {device_id}")
        return device_id // self.devices_per_slice

    def pod_of_slice(self, slice_id: int) -> int:
        if not 0 <= slice_id < self.total_slices:
            raise IndexError(f"unknown slice id {slice_id}")
        return slice_id // self.slices_per_pod

    def devices_of(self, slice_id: int) -> list[int]:
        """Dense ascending device ids of one slice."""
        if not 0 <= slice_id < self.total_slices:
            raise IndexError(f"unknown slice id {slice_id}")
        start = slice_id * self.devices_per_slice
        return list(range(start, start + self.devices_per_slice))


def build_topology(datacenters: int, pods_per_datacenter: int,
                   slices_per_pod: int, devices_per_slice: int) -> ClusterTopology:
    counts = {
        "datacenters": datacenters,
        "pods_per_datacenter": pods_per_datacenter,
        "slices_per_pod": slices_per_pod,
        "devices_per_slice": devices_per_slice,
    }
    for name, value in counts.items():
        if not isinstance(value, int) or value < 1:
            raise ConfigurationError(f"topology.{name} must be an integer >= 1, got {value!r}")
    return ClusterTopology(**counts)


def devices_of(topology: ClusterTopology, slice_id: int) -> list[int]:
    return topology.devices_of(slice_id)


class SliceState(enum.IntEnum):
    HEALTHY = 0
    FAILED = 1
    RECOVERING = 2


class DeviceState(enum.IntEnum):
    HEALTHY = 0
    SDC_PRONE = 1
    EXCLUDED = 2


@dataclass
class SliceHealth:
    state: SliceState = SliceState.HEALTHY
    since: float = 0.0


@dataclass
class DeviceHealth:
    state: DeviceState = DeviceState.HEALTHY
    sdc_onset: float | None = None


@dataclass
class FleetState:
    """Mutable health state over an immutable topology.

    Owned by the single controller; legal slice transitions are
    Healthy -> Failed -> Recovering -> Healthy only.
    """

    topology: ClusterTopology
    slices: list[SliceHealth] = field(default_factory=list)
    devices: dict[int, DeviceHealth] = field(default_factory=dict)

    def __post_init__(self):
        if not self.slices:
            self.slices = [SliceHealth() for _ in range(self.topology.total_slices)]

    def _device(self, device_id: int) -> DeviceHealth:
        # Device health is stored sparsely; untouched devices are Healthy.
        if not 0 <= device_id < self.topology.total_devices:
            raise IndexError(f"unknown device id {device_id}")
        health = self.devices.get(device_id)
        if health is None:
            health = DeviceHealth()
            self.devices[device_id] = health
        return health

    def device_state(self, device_id: int) -> DeviceState:
        health = self.devices.get(device_id)
        return health.state if health is not None else DeviceState.HEALTHY

    def slice_state(self, slice_id: int) -> SliceState:
        return self.slices[slice_id].state

    def _transition_slice(self, slice_id: int, expected: tuple[SliceState, ...],
                          new: SliceState, now: float) -> None:
        health = self.slices[slice_id]
        if health.state not in expected:
            raise TransitionError(
                f"slice {slice_id}: illegal transition {health.state.name} -> {new.name}")
        if now < health.since:
            raise TransitionError(
                f"slice {slice_id}: transition time {now} precedes {health.since}")
        health.state = new
        health.since = now

    def fail_slice(self, slice_id: int, now: float) -> None:
        self._transition_slice(slice_id, (SliceState.HEALTHY,), SliceState.FAILED, now)

    def start_recovery(self, slice_id: int, now: float) -> None:
        self._transition_slice(slice_id, (SliceState.FAILED,), SliceState.RECOVERING, now)

    def recover_slice(self, slice_id: int, now: float) -> None:
        # A recovery event may arrive while the slice is still Failed;
        # normalize through Recovering.
        if self.slices[slice_id].state == SliceState.FAILED:
            self.start_recovery(slice_id, now)
        self._transition_slice(slice_id, (SliceState.RECOVERING,), SliceState.HEALTHY, now)

    def mark_sdc_prone(self, device_id: int, now: float) -> bool:
        """Returns False if the device cannot become SDC-prone (excluded/repeat)."""
        health = self._device(device_id)
        if health.state != DeviceState.HEALTHY:
            return False
        health.state = DeviceState.SDC_PRONE
        health.sdc_onset = now
        return True

    def exclude_device(self, device_id: int, now: float) -> bool:
        """Exclusion is absorbing; returns False on a repeat exclusion."""
        health = self._device(device_id)
        if health.state == DeviceState.EXCLUDED:
            return False
        health.state = DeviceState.EXCLUDED
        return True

    def healthy_slice_count(self) -> int:
        return sum(1 for s in self.slices if s.state == SliceState.HEALTHY)

    def healthy_slices_by_pod(self) -> list[int]:
        topo = self.topology
        counts = [0] * topo.total_pods
        for slice_id, health in enumerate(self.slices):
            if health.state == SliceState.HEALTHY:
                counts[slice_id // topo.slices_per_pod] += 1
        return counts

    def healthy_slice_ids(self) -> list[int]:
        return [i for i, s in enumerate(self.slices) if s.state == SliceState.HEALTHY]

    def excluded_device_ids(self) -> list[int]:
        return sorted(d for d, h in self.devices.items() if h.state == DeviceState.EXCLUDED)

    def sdc_prone_device_ids(self) -> list[int]:
        return sorted(d for d, h in self.devices.items() if h.state == DeviceState.SDC_PRONE)


def healthy_slice_count(fleet: FleetState) -> int:
    return fleet.healthy_slice_count()
