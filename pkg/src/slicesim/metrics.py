"""Wall-time bucket accounting, run reports, and report aggregation.

Every simulated second of a run lands in exactly one bucket: compute,
reconfiguration pause, tail reschedule, baseline reschedule, or the idle
residual (the partial step at the horizon). Step counters are a separate
dimension from the time buckets: recompute time is compute, recomputed steps
are counted as replays/rollbacks.
"""

from __future__ import annotations

import csv
import hashlib
import json
import math
from dataclasses import asdict, dataclass, fields
from typing import Iterable, NamedTuple


@dataclass
class GoodputReport:
    seed: int
    horizon_seconds: float
    compute_seconds: float = 0.0
    reconfig_seconds_total: float = 0.0
    tail_seconds_total: float = 0.0
    baseline_reschedule_seconds_total: float = 0.0
    idle_residual_seconds: float = 0.0
    steps_computed: int = 0
    steps_replayed: int = 0
    steps_rolled_back: int = 0
    genuine_sdc_incidents: int = 0
    suspicions: int = 0
    silent_corruptions: int = 0
    interruptions: int = 0
    mean_detection_latency_seconds: float = 0.0
    straggler_observations: int = 0
    config_hash: str = ""

    def bucket_sum(self) -> float:
        return (self.compute_seconds + self.reconfig_seconds_total
                + self.tail_seconds_total + self.baseline_reschedule_seconds_total
                + self.idle_residual_seconds)


class ReplayStats(NamedTuple):
    replay_fraction: float
    genuine_fraction: float
    recompute_fraction: float
    no_replays: bool


def goodput(report: GoodputReport) -> float:
    """Fraction of wall time spent computing steps."""
    if report.horizon_seconds <= 0:
        raise ValueError("horizon_seconds must be > 0")
    return report.compute_seconds / report.horizon_seconds


def overhead_split(report: GoodputReport) -> tuple[float, float] | None:
    """(reconfig, tail) fractions of non-compute time; None when there is none."""
    non_compute = report.horizon_seconds - report.compute_seconds
    if non_compute <= 0.0:
        return None
    return (report.reconfig_seconds_total / non_compute,
            report.tail_seconds_total / non_compute)


def replay_stats(report: GoodputReport) -> ReplayStats:
    if report.steps_computed <= 0:
        raise ValueError("steps_computed must be > 0")
    steps = report.steps_computed
    replay_fraction = report.steps_replayed / steps
    if report.steps_replayed > 0:
        genuine_fraction = report.genuine_sdc_incidents / report.steps_replayed
        no_replays = False
    else:
        genuine_fraction = 0.0
        no_replays = True
    recompute_fraction = (report.steps_replayed + report.steps_rolled_back) / steps
    return ReplayStats(replay_fraction, genuine_fraction, recompute_fraction, no_replays)


_AGGREGATED_FIELDS = [f.name for f in fields(GoodputReport)
                      if f.name not in ("seed", "config_hash")]


@dataclass
class AggregateReport:
    count: int
    mean: dict[str, float]
    stddev: dict[str, float]


def merge_reports(reports: list[GoodputReport]) -> AggregateReport:
    """Field-wise mean and sample standard deviation over a seed sweep."""
    if not reports:
        raise ValueError("reports must be nonempty")
    first = reports[0]
    for r in reports[1:]:
        if r.horizon_seconds != first.horizon_seconds:
            raise ValueError("merge_reports: horizon_seconds mismatch")
        if r.config_hash != first.config_hash:
            raise ValueError("merge_reports: config_hash mismatch")
    n = len(reports)
    mean: dict[str, float] = {}
    stddev: dict[str, float] = {}
    for name in _AGGREGATED_FIELDS:
        values = [float(getattr(r, name)) for r in reports]
        m = sum(values) / n
        mean[name] = m
        if n > 1:
            stddev[name] = math.sqrt(sum((v - m) ** 2 for v in values) / (n - 1))
        else:
            stddev[name] = 0.0
    mean["goodput"] = sum(goodput(r) for r in reports) / n
    if n > 1:
        gm = mean["goodput"]
        stddev["goodput"] = math.sqrt(
            sum((goodput(r) - gm) ** 2 for r in reports) / (n - 1))
    else:
        stddev["goodput"] = 0.0
    return AggregateReport(count=n, mean=mean, stddev=stddev)


def config_hash(scenario_echo: dict) -> str:
    """Stable hash of the scenario (seed excluded) for sweep compatibility checks."""
    blob = json.dumps(scenario_echo, sort_keys=True).encode()
    return hashlib.sha256(blob).hexdigest()[:16]


def report_document(report: GoodputReport, scenario_echo: dict) -> dict:
    """Serializable report body; deliberately contains no timestamps."""
    doc = asdict(report)
    doc["goodput"] = goodput(report)
    split = overhead_split(report)
    doc["overhead_split"] = (
        {"reconfig_fraction": split[0], "tail_fraction": split[1]}
        if split is not None else None)
    if report.steps_computed > 0:
        stats = replay_stats(report)
        doc["replay_stats"] = {
            "replay_fraction": stats.replay_fraction,
            "genuine_fraction": stats.genuine_fraction,
            "recompute_fraction": stats.recompute_fraction,
            "no_replays": stats.no_replays,
        }
    else:
        doc["replay_stats"] = None
    doc["scenario"] = scenario_echo
    return doc


def dump_report_json(doc: dict) -> str:
    return json.dumps(doc, sort_keys=True, indent=2) + "\n"


def aggregate_document(aggregate: AggregateReport, scenario_echo: dict,
                       seeds: list[int]) -> dict:
    return {
        "count": aggregate.count,
        "seeds": seeds,
        "mean": aggregate.mean,
        "stddev": aggregate.stddev,
        "scenario": scenario_echo,
    }


TIMELINE_HEADER = ["time_start", "time_end", "bucket", "healthy_slices", "step_index"]


def write_timeline_csv(path, rows: Iterable[tuple]) -> None:
    """Rows: (time_start, time_end, bucket, healthy_slices, step_index|None)."""
    with open(path, "w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(TIMELINE_HEADER)
        for start, end, bucket, healthy, step_index in rows:
            writer.writerow([
                f"{start:.6f}", f"{end:.6f}", bucket, healthy,
                "" if step_index is None else step_index,
            ])
