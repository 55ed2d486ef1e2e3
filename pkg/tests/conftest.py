import pytest

from slicesim.controller import ControllerConfig, Mode, SdcMode
from slicesim.faults import FaultRates
from slicesim.topology import build_topology


def make_rates(**overrides) -> FaultRates:
    return FaultRates(**overrides)


def make_config(**overrides) -> ControllerConfig:
    defaults = dict(mode=Mode.ELASTIC, sdc_mode=SdcMode.SPLIT_PHASE,
                    base_step_seconds=10.0, reconfig_seconds=30.0,
                    tail_failure_prob=0.0, reschedule_seconds=600.0,
                    checkpoint_interval_steps=100,
                    legacy_detection_delay_seconds=14400.0,
                    straggler_threshold_ratio=2.0)
    defaults.update(overrides)
    return ControllerConfig(**defaults)


@pytest.fixture
def tiny_topology():
    return build_topology(1, 1, 4, 4)


@pytest.fixture
def default_topology():
    return build_topology(1, 3, 32, 280)
