import math

import pytest

from conftest import make_rates
from slicesim._bits import TAG_CORRUPT, TAG_JUDGE, Stream
from slicesim.faults import (
    FaultKind,
    FaultRates,
    corruption_for_step,
    false_suspicion,
    sample_trace,
)
from slicesim.topology import FleetState, build_topology


def test_all_rates_zero_gives_empty_trace(default_topology):
    trace = sample_trace(make_rates(), default_topology, 3600.0, 1)
    assert trace.events == ()


def test_trace_determinism(default_topology):
    rates = make_rates(slice_failures_per_hour=3.0,
                       sdc_onsets_per_device_per_hour=1e-5,
                       debug_interventions_per_day=4.0)
    a = sample_trace(rates, default_topology, 86400.0, 42)
    b = sample_trace(rates, default_topology, 86400.0, 42)
    assert a == b
    c = sample_trace(rates, default_topology, 86400.0, 43)
    assert a != c


def test_nonpositive_horizon_rejected(default_topology):
    with pytest.raises(ValueError):
        sample_trace(make_rates(), default_topology, 0.0, 1)


def test_poisson_failure_counts(default_topology):
    # rate 3/h over 100 h: mean 300; [240, 360] is beyond +-3 sigma.
    rates = make_rates(slice_failures_per_hour=3.0)
    for seed in range(30):
        trace = sample_trace(rates, default_topology, 100 * 3600.0, seed)
        failures = [e for e in trace.events if e.kind == FaultKind.SLICE_FAILURE]
        assert 240 <= len(failures) <= 360, f"seed {seed}: {len(failures)}"


def test_every_failure_has_one_recovery(default_topology):
    rates = make_rates(slice_failures_per_hour=5.0, slice_recovery_seconds=600.0)
    horizon = 48 * 3600.0
    trace = sample_trace(rates, default_topology, horizon, 7)
    failures = [e for e in trace.events if e.kind == FaultKind.SLICE_FAILURE]
    recoveries = [e for e in trace.events if e.kind == FaultKind.SLICE_RECOVERED]
    expected = [e for e in failures if e.time + 600.0 < horizon]
    assert len(recoveries) == len(expected)
    paired = {(e.slice_id, e.time + 600.0) for e in expected}
    assert {(e.slice_id, e.time) for e in recoveries} == paired


def test_events_sorted_by_time(default_topology):
    rates = make_rates(slice_failures_per_hour=6.0,
                       sdc_onsets_per_device_per_hour=2e-5,
                       debug_interventions_per_day=10.0)
    trace = sample_trace(rates, default_topology, 86400.0, 3)
    times = [e.time for e in trace.events]
    assert times == sorted(times)


def test_stream_independence_across_classes(default_topology):
    base = make_rates(slice_failures_per_hour=2.0,
                      sdc_onsets_per_device_per_hour=3e-5)
    bumped = make_rates(slice_failures_per_hour=9.0,
                        sdc_onsets_per_device_per_hour=3e-5)
    horizon = 86400.0
    onsets_a = [(e.time, e.device_id)
                for e in sample_trace(base, default_topology, horizon, 11).events
                if e.kind == FaultKind.SDC_ONSET]
    onsets_b = [(e.time, e.device_id)
                for e in sample_trace(bumped, default_topology, horizon, 11).events
                if e.kind == FaultKind.SDC_ONSET]
    assert onsets_a == onsets_b and onsets_a


def test_debug_events_carry_rollback_depth(default_topology):
    rates = make_rates(debug_interventions_per_day=24.0, debug_rollback_depth_steps=7)
    trace = sample_trace(rates, default_topology, 86400.0, 5)
    debugs = [e for e in trace.events if e.kind == FaultKind.DEBUG_INTERVENTION]
    assert debugs and all(e.rollback_depth == 7 for e in debugs)


def _fleet_with_prone(topo, devices, now=0.0):
    fleet = FleetState(topo)
    for d in devices:
        assert fleet.mark_sdc_prone(d, now)
    return fleet


def test_corruption_empty_without_prone_devices(tiny_topology):
    fleet = FleetState(tiny_topology)
    rates = make_rates(sdc_corruption_prob_per_step=1.0)
    for exec_index in range(50):
        stream = Stream(1, TAG_CORRUPT, exec_index)
        assert corruption_for_step(fleet, range(16), rates, stream) == frozenset()


def test_corruption_prob_one_always_hits(tiny_topology):
    fleet = _fleet_with_prone(tiny_topology, [5])
    rates = make_rates(sdc_corruption_prob_per_step=1.0)
    for exec_index in range(50):
        stream = Stream(1, TAG_CORRUPT, exec_index)
        assert corruption_for_step(fleet, range(16), rates, stream) == frozenset({5})


def test_corruption_monte_carlo_frequency(tiny_topology):
    fleet = _fleet_with_prone(tiny_topology, [5])
    rates = make_rates(sdc_corruption_prob_per_step=0.3)
    hits = sum(
        bool(corruption_for_step(fleet, range(16), rates, Stream(123, TAG_CORRUPT, i)))
        for i in range(10_000))
    assert abs(hits / 10_000 - 0.3) < 0.02


def test_false_suspicion_degenerate_probs():
    never = make_rates(false_suspicion_prob_per_step=0.0)
    always = make_rates(false_suspicion_prob_per_step=1.0)
    for i in range(100):
        assert not false_suspicion(never, Stream(5, TAG_JUDGE, i))
        assert false_suspicion(always, Stream(5, TAG_JUDGE, i))


def test_false_suspicion_monte_carlo_frequency():
    # 1e6 per-step draws via the same indexed-stream scheme the run loop uses.
    import numpy as np
    from slicesim import _backend
    from slicesim._bits import prob_threshold

    prob = 0.00235
    words = _backend.exec_draws(777, TAG_JUDGE, 0, 1_000_000, 0)
    frequency = float((words < np.uint64(prob_threshold(prob))).mean())
    assert abs(frequency - prob) < 0.0002
    # Scalar spot check on a prefix: identical draws.
    rates = make_rates(false_suspicion_prob_per_step=prob)
    scalar = [false_suspicion(rates, Stream(777, TAG_JUDGE, i)) for i in range(2000)]
    vector = (words[:2000] < np.uint64(prob_threshold(prob))).tolist()
    assert scalar == vector


@pytest.mark.parametrize("field,value", [
    ("slice_failures_per_hour", -1.0),
    ("slice_recovery_seconds", 0.0),
    ("sdc_onsets_per_device_per_hour", -0.5),
    ("sdc_corruption_prob_per_step", 1.5),
    ("false_suspicion_prob_per_step", -0.1),
    ("sdc_detect_prob_given_corruption", 2.0),
    ("debug_interventions_per_day", -3.0),
    ("debug_rollback_depth_steps", 0),
])
def test_rates_validation_names_field(field, value):
    rates = make_rates(**{field: value})
    with pytest.raises(ValueError, match=f"faults.{field}"):
        rates.validate()


def test_exponential_gap_reference():
    # The gap formula is -log1p(-u)/rate with u from the class stream.
    stream = Stream(9, 5)     # TAG_TRACE_FAIL
    u = Stream(9, 5).next_u01()
    expected = -math.log1p(-u) / (3.0 / 3600.0)
    assert math.isclose(stream.next_exponential(3.0 / 3600.0), expected)
