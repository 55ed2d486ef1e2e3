import math

import pytest

from conftest import make_config, make_rates
from slicesim.controller import run_training
from slicesim.metrics import (
    GoodputReport,
    goodput,
    merge_reports,
    overhead_split,
    replay_stats,
)
from slicesim.topology import build_topology


def make_report(**overrides) -> GoodputReport:
    defaults = dict(seed=0, horizon_seconds=100.0, compute_seconds=100.0,
                    steps_computed=1000, config_hash="h")
    defaults.update(overrides)
    return GoodputReport(**defaults)


def test_goodput_fault_free_is_one():
    assert goodput(make_report()) == 1.0


def test_goodput_headline_figure():
    report = make_report(compute_seconds=93.4)
    assert goodput(report) == 0.934


def test_goodput_bucket_example_with_split():
    report = make_report(compute_seconds=93.4, reconfig_seconds_total=3.3,
                         tail_seconds_total=3.3,
                         baseline_reschedule_seconds_total=0.0)
    assert goodput(report) == 0.934
    split = overhead_split(report)
    assert math.isclose(split[0], 0.5) and math.isclose(split[1], 0.5)


def test_overhead_split_symmetric():
    report = make_report(compute_seconds=90.0, reconfig_seconds_total=5.0,
                         tail_seconds_total=5.0)
    assert overhead_split(report) == (0.5, 0.5)


def test_overhead_split_all_reconfig():
    report = make_report(compute_seconds=90.0, reconfig_seconds_total=10.0)
    assert overhead_split(report) == (1.0, 0.0)


def test_overhead_split_no_overhead_marker():
    assert overhead_split(make_report()) is None


def test_replay_stats_zero_replays():
    report = make_report(steps_computed=1000, steps_rolled_back=40)
    stats = replay_stats(report)
    assert stats.replay_fraction == 0.0
    assert stats.genuine_fraction == 0.0
    assert stats.no_replays
    assert stats.recompute_fraction == 40 / 1000


def test_replay_stats_ratio_arithmetic():
    report = make_report(steps_computed=1000, steps_replayed=4,
                         genuine_sdc_incidents=1, steps_rolled_back=36)
    stats = replay_stats(report)
    assert stats.replay_fraction == 0.004
    assert stats.genuine_fraction == 0.25
    assert stats.recompute_fraction == 0.04
    assert not stats.no_replays


def test_replay_stats_requires_steps():
    with pytest.raises(ValueError):
        replay_stats(make_report(steps_computed=0))


def test_merge_single_report():
    report = make_report(compute_seconds=93.0)
    aggregate = merge_reports([report])
    assert aggregate.count == 1
    assert aggregate.mean["compute_seconds"] == 93.0
    assert aggregate.stddev["compute_seconds"] == 0.0
    assert aggregate.mean["goodput"] == 0.93


def test_merge_two_reports_mean():
    a = make_report(compute_seconds=93.0)
    b = make_report(compute_seconds=95.0)
    aggregate = merge_reports([a, b])
    assert math.isclose(aggregate.mean["goodput"], 0.94)


def test_merge_matches_independent_mean_stddev_oracle():
    values = [91.3, 92.7, 93.1, 93.4, 93.9, 94.2, 94.8, 95.0, 95.5, 96.1]
    reports = [make_report(seed=i, compute_seconds=v) for i, v in enumerate(values)]
    aggregate = merge_reports(reports)
    # Spreadsheet-style oracle: explicit sums.
    n = len(values)
    mean = sum(values) / n
    var = sum((v - mean) ** 2 for v in values) / (n - 1)
    assert math.isclose(aggregate.mean["compute_seconds"], mean, rel_tol=1e-12)
    assert math.isclose(aggregate.stddev["compute_seconds"], math.sqrt(var),
                        rel_tol=1e-12)


def test_merge_rejects_mixed_horizon():
    a = make_report()
    b = make_report(horizon_seconds=200.0)
    with pytest.raises(ValueError, match="horizon_seconds"):
        merge_reports([a, b])


def test_merge_rejects_mixed_config():
    a = make_report()
    b = make_report(config_hash="other")
    with pytest.raises(ValueError, match="config_hash"):
        merge_reports([a, b])


def test_merge_rejects_empty():
    with pytest.raises(ValueError):
        merge_reports([])


def test_bucket_conservation_on_faulty_run():
    topo = build_topology(1, 2, 8, 4)
    rates = make_rates(slice_failures_per_hour=6.0,
                       sdc_onsets_per_device_per_hour=0.002,
                       sdc_corruption_prob_per_step=0.4,
                       sdc_detect_prob_given_corruption=0.9,
                       false_suspicion_prob_per_step=0.005,
                       debug_interventions_per_day=24.0,
                       debug_rollback_depth_steps=40)
    for seed in range(5):
        _, report = run_training(make_config(tail_failure_prob=0.1), rates, topo,
                                 86400.0, seed)
        assert abs(report.bucket_sum() - report.horizon_seconds) <= 1e-9 * 86400.0


def test_replay_fraction_stationarity_between_windows():
    # Two disjoint halves of one long run differ by < 3 sigma in replay rate.
    topo = build_topology(1, 1, 16, 8)
    rates = make_rates(false_suspicion_prob_per_step=0.0025)
    ledger, report = run_training(make_config(), rates, topo, 10 * 86400.0, 13)
    from slicesim.controller import StepStatus
    half = report.horizon_seconds / 2
    replayed = [0, 0]
    total = [0, 0]
    for i, status in enumerate(ledger.col_status):
        window = 0 if ledger.col_start[i] < half else 1
        total[window] += 1
        if status in (int(StepStatus.REPLAYED_FALSE_ALARM),
                      int(StepStatus.REPLAYED_GENUINE)):
            replayed[window] += 1
    f1, f2 = replayed[0] / total[0], replayed[1] / total[1]
    p = (replayed[0] + replayed[1]) / (total[0] + total[1])
    sigma = math.sqrt(p * (1 - p) * (1 / total[0] + 1 / total[1]))
    assert abs(f1 - f2) < 3 * sigma
