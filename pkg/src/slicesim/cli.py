"""Command-line front end: run scenarios, seed sweeps, paired comparisons.

Exit codes: 0 success, 2 scenario parse/validation failure, 3 I/O failure.
Report bodies carry no timestamps (byte-identical across invocations); run
metadata with a generated_at stamp goes to a sidecar file.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from datetime import datetime, timezone
from pathlib import Path

from .controller import Mode, SdcMode, run_training
from .faults import sample_trace
from .metrics import (
    GoodputReport,
    aggregate_document,
    dump_report_json,
    goodput,
    merge_reports,
    report_document,
    write_timeline_csv,
)
from .scenario import Scenario, ScenarioError, load_scenario

AXES = ("elastic-vs-baseline", "splitphase-vs-legacy")


def _atomic_write(path: Path, payload: str) -> None:
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_text(payload)
    os.replace(tmp, path)


def _run_one(scenario: Scenario, seed: int, out_dir: str | None,
             fmt: str) -> GoodputReport:
    ledger, report = run_training(scenario.controller, scenario.faults,
                                  scenario.topology, scenario.horizon_seconds, seed)
    report.config_hash = scenario.config_hash()
    if out_dir is not None:
        out = Path(out_dir)
        doc = report_document(report, scenario.echo())
        _atomic_write(out / f"report_seed{seed}.json", dump_report_json(doc))
        if fmt == "csv":
            tmp = out / f"timeline_seed{seed}.csv.tmp"
            write_timeline_csv(tmp, ledger.timeline_rows(scenario.horizon_seconds))
            os.replace(tmp, out / f"timeline_seed{seed}.csv")
    return report


def _arm_configs(scenario: Scenario, axis: str):
    base = scenario.controller
    if axis == "elastic-vs-baseline":
        return (dataclasses.replace(base, mode=Mode.ELASTIC),
                dataclasses.replace(base, mode=Mode.NON_ELASTIC_BASELINE),
                "elastic", "baseline")
    return (dataclasses.replace(base, sdc_mode=SdcMode.SPLIT_PHASE),
            dataclasses.replace(base, sdc_mode=SdcMode.LEGACY_DELAYED),
            "split_phase", "legacy")


def _run_pair(scenario: Scenario, seed: int, axis: str) -> dict:
    """Both arms on the identical fault trace for this seed."""
    config_a, config_b, label_a, label_b = _arm_configs(scenario, axis)
    trace = sample_trace(scenario.faults, scenario.topology,
                         scenario.horizon_seconds, seed)
    _, report_a = run_training(config_a, scenario.faults, scenario.topology,
                               scenario.horizon_seconds, seed, trace=trace)
    _, report_b = run_training(config_b, scenario.faults, scenario.topology,
                               scenario.horizon_seconds, seed, trace=trace)
    recompute_a = report_a.steps_replayed + report_a.steps_rolled_back
    recompute_b = report_b.steps_replayed + report_b.steps_rolled_back
    return {
        "seed": seed,
        f"goodput_{label_a}": goodput(report_a),
        f"goodput_{label_b}": goodput(report_b),
        "goodput_delta": goodput(report_a) - goodput(report_b),
        f"recompute_steps_{label_a}": recompute_a,
        f"recompute_steps_{label_b}": recompute_b,
        "recompute_delta": recompute_a - recompute_b,
        "interruptions": report_a.interruptions,
        "genuine_sdc_incidents_a": report_a.genuine_sdc_incidents,
    }


def _parallel_map(fn, items, jobs: int):
    if jobs <= 1 or len(items) <= 1:
        return [fn(*item) for item in items]
    with ProcessPoolExecutor(max_workers=min(jobs, len(items))) as pool:
        futures = [pool.submit(fn, *item) for item in items]
        return [f.result() for f in futures]


def _load(args) -> Scenario:
    scenario = load_scenario(args.scenario, args.set or [])
    if args.horizon_days is not None:
        if args.horizon_days <= 0:
            raise ScenarioError("horizon_days must be > 0")
        scenario.horizon_days = args.horizon_days
    if args.seeds is not None or args.base_seed is not None:
        base = args.base_seed if args.base_seed is not None else scenario.seeds[0]
        count = args.seeds if args.seeds is not None else len(scenario.seeds)
        if count < 1:
            raise ScenarioError("seeds count must be >= 1")
        scenario.seeds = [base + i for i in range(count)]
    scenario.validate()
    return scenario


def _write_sidecar(out: Path, scenario: Scenario, kind: str) -> None:
    meta = {
        "kind": kind,
        "scenario_name": scenario.name,
        "generated_at": datetime.now(timezone.utc).isoformat(),
    }
    _atomic_write(out / "run_meta.json", json.dumps(meta, indent=2) + "\n")


def cmd_run(args) -> int:
    scenario = _load(args)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    items = [(scenario, seed, str(out), args.format) for seed in scenario.seeds]
    reports = _parallel_map(_run_one, items, args.jobs)
    aggregate = merge_reports(reports)
    doc = aggregate_document(aggregate, scenario.echo(), scenario.seeds)
    _atomic_write(out / "aggregate.json", dump_report_json(doc))
    _write_sidecar(out, scenario, "run")
    print(f"{scenario.name}: {len(reports)} seed(s), "
          f"mean goodput {aggregate.mean['goodput']:.4f} "
          f"(stddev {aggregate.stddev['goodput']:.4f}) -> {out}")
    return 0


def cmd_compare(args) -> int:
    scenario = _load(args)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    items = [(scenario, seed, args.axis) for seed in scenario.seeds]
    rows = _parallel_map(_run_pair, items, args.jobs)
    doc = {"axis": args.axis, "scenario": scenario.echo(), "rows": rows}
    stem = f"compare_{args.axis.replace('-', '_')}"
    _atomic_write(out / f"{stem}.json", dump_report_json(doc))
    if args.format == "csv":
        header = list(rows[0].keys())
        lines = [",".join(header)]
        lines += [",".join(str(row[k]) for k in header) for row in rows]
        _atomic_write(out / f"{stem}.csv", "\n".join(lines) + "\n")
    _write_sidecar(out, scenario, f"compare:{args.axis}")
    mean_delta = sum(r["goodput_delta"] for r in rows) / len(rows)
    print(f"{scenario.name} [{args.axis}]: {len(rows)} seed(s), "
          f"mean goodput delta {mean_delta:+.4f} -> {out}")
    return 0


def cmd_validate(args) -> int:
    scenario = _load(args)
    doc = scenario.echo()
    doc["seeds"] = scenario.seeds
    print(json.dumps(doc, indent=2, sort_keys=True))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="slicesim",
        description="Simulate slice-elastic, SDC-hardened synchronous training runs.")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p, needs_out: bool):
        p.add_argument("--scenario", required=True,
                       help="bundled scenario name (fault-free, gemini-run) or JSON path")
        if needs_out:
            p.add_argument("--out", required=True, help="output directory")
        p.add_argument("--seeds", type=int, default=None,
                       help="number of seeds (overrides the scenario's list)")
        p.add_argument("--base-seed", type=int, default=None,
                       help="first seed of the sweep")
        p.add_argument("--horizon-days", type=float, default=None)
        p.add_argument("--jobs", type=int, default=1,
                       help="parallel worker processes for the seed sweep")
        p.add_argument("--set", action="append", metavar="KEY=VALUE",
                       help="override a scenario field, e.g. faults.slice_failures_per_hour=2")
        p.add_argument("--format", choices=("json", "csv"), default="json",
                       help="csv additionally writes timeline/table exports")

    p_run = sub.add_parser("run", help="simulate one scenario over its seeds")
    add_common(p_run, needs_out=True)
    p_run.set_defaults(func=cmd_run)

    p_cmp = sub.add_parser("compare", help="paired two-arm comparison on identical traces")
    add_common(p_cmp, needs_out=True)
    p_cmp.add_argument("--axis", choices=AXES, required=True)
    p_cmp.set_defaults(func=cmd_compare)

    p_val = sub.add_parser("validate", help="parse and validate without simulating")
    add_common(p_val, needs_out=False)
    p_val.set_defaults(func=cmd_validate)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ScenarioError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
