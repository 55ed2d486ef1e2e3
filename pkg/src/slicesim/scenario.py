"""Scenario files: JSON documents binding topology, fault rates, controller
config, horizon, and seeds. Bundled scenarios ship as package data and can be
referenced by bare name ("gemini-run", "fault-free") or by path.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, fields
from importlib import resources
from pathlib import Path

from .controller import ControllerConfig, Mode, SdcMode
from .faults import FaultRates
from .metrics import config_hash
from .topology import ClusterTopology, build_topology


class ScenarioError(ValueError):
    """Scenario parse/validation failure; message carries the field path."""


BUNDLED = {"fault-free": "fault_free.json", "gemini-run": "gemini_run.json"}

_TOPOLOGY_FIELDS = ("datacenters", "pods_per_datacenter", "slices_per_pod",
                    "devices_per_slice")


@dataclass
class Scenario:
    name: str
    topology: ClusterTopology
    faults: FaultRates
    controller: ControllerConfig
    horizon_days: float
    seeds: list[int]
    notes: dict | None = None

    @property
    def horizon_seconds(self) -> float:
        return self.horizon_days * 86400.0

    def validate(self) -> None:
        if not self.name:
            raise ScenarioError("name must be nonempty")
        if self.horizon_days <= 0:
            raise ScenarioError("horizon_days must be > 0")
        if not self.seeds:
            raise ScenarioError("seeds must be nonempty")
        try:
            self.faults.validate()
            self.controller.validate()
        except ValueError as exc:
            raise ScenarioError(str(exc)) from exc

    def echo(self) -> dict:
        """Normalized scenario body (without seeds) echoed into reports."""
        return {
            "name": self.name,
            "topology": {f: getattr(self.topology, f) for f in _TOPOLOGY_FIELDS},
            "faults": {f.name: getattr(self.faults, f.name)
                       for f in fields(FaultRates)},
            "controller": {
                "mode": self.controller.mode.value,
                "sdc_mode": self.controller.sdc_mode.value,
                "base_step_seconds": self.controller.base_step_seconds,
                "reconfig_seconds": self.controller.reconfig_seconds,
                "tail_failure_prob": self.controller.tail_failure_prob,
                "reschedule_seconds": self.controller.reschedule_seconds,
                "checkpoint_interval_steps": self.controller.checkpoint_interval_steps,
                "legacy_detection_delay_seconds":
                    self.controller.legacy_detection_delay_seconds,
                "straggler_threshold_ratio": self.controller.straggler_threshold_ratio,
            },
            "horizon_days": self.horizon_days,
        }

    def config_hash(self) -> str:
        return config_hash(self.echo())


def _require(mapping: dict, key: str, path: str):
    if key not in mapping:
        raise ScenarioError(f"{path}.{key} is required")
    return mapping[key]


def _build_seeds(raw, path: str = "seeds") -> list[int]:
    if isinstance(raw, list):
        if not raw or not all(isinstance(s, int) for s in raw):
            raise ScenarioError(f"{path} must be a nonempty list of integers")
        return list(raw)
    if isinstance(raw, dict):
        base = _require(raw, "base_seed", path)
        count = _require(raw, "count", path)
        if not isinstance(base, int) or not isinstance(count, int) or count < 1:
            raise ScenarioError(f"{path}.base_seed/count must be integers, count >= 1")
        return [base + i for i in range(count)]
    raise ScenarioError(f"{path} must be a list or a base_seed/count object")


def _coerce_section(cls, raw: dict, path: str):
    known = {f.name for f in fields(cls)}
    unknown = set(raw) - known
    if unknown:
        raise ScenarioError(f"{path}.{sorted(unknown)[0]} is not a recognized field")
    try:
        return cls(**raw)
    except TypeError as exc:
        raise ScenarioError(f"{path}: {exc}") from exc


def scenario_from_dict(doc: dict, default_name: str = "") -> Scenario:
    if not isinstance(doc, dict):
        raise ScenarioError("scenario document must be a JSON object")
    name = doc.get("name", default_name)

    topo_raw = dict(_require(doc, "topology", "scenario"))
    unknown = set(topo_raw) - set(_TOPOLOGY_FIELDS)
    if unknown:
        raise ScenarioError(f"topology.{sorted(unknown)[0]} is not a recognized field")
    for key in _TOPOLOGY_FIELDS:
        _require(topo_raw, key, "topology")
    try:
        topology = build_topology(**topo_raw)
    except ValueError as exc:
        raise ScenarioError(str(exc)) from exc

    faults = _coerce_section(FaultRates, dict(_require(doc, "faults", "scenario")),
                             "faults")

    ctrl_raw = dict(_require(doc, "controller", "scenario"))
    mode_raw = ctrl_raw.pop("mode", "elastic")
    sdc_raw = ctrl_raw.pop("sdc_mode", "split_phase")
    try:
        mode = Mode(mode_raw)
    except ValueError:
        raise ScenarioError(f"controller.mode must be one of "
                            f"{[m.value for m in Mode]}, got {mode_raw!r}") from None
    try:
        sdc_mode = SdcMode(sdc_raw)
    except ValueError:
        raise ScenarioError(f"controller.sdc_mode must be one of "
                            f"{[m.value for m in SdcMode]}, got {sdc_raw!r}") from None
    controller = _coerce_section(ControllerConfig, ctrl_raw, "controller")
    controller.mode = mode
    controller.sdc_mode = sdc_mode

    horizon_days = _require(doc, "horizon_days", "scenario")
    if not isinstance(horizon_days, (int, float)):
        raise ScenarioError("horizon_days must be a number")

    seeds = _build_seeds(_require(doc, "seeds", "scenario"))

    scenario = Scenario(name=name, topology=topology, faults=faults,
                        controller=controller, horizon_days=float(horizon_days),
                        seeds=seeds, notes=doc.get("notes"))
    scenario.validate()
    return scenario


def _parse_override_value(raw: str):
    lowered = raw.lower()
    if lowered in ("true", "false"):
        return lowered == "true"
    try:
        return int(raw)
    except ValueError:
        pass
    try:
        return float(raw)
    except ValueError:
        return raw


def apply_overrides(doc: dict, overrides: list[str]) -> dict:
    """Apply repeatable --set field.path=value entries to the raw document."""
    for entry in overrides:
        if "=" not in entry:
            raise ScenarioError(f"--set expects field.path=value, got {entry!r}")
        path, raw_value = entry.split("=", 1)
        keys = path.strip().split(".")
        if not all(keys):
            raise ScenarioError(f"--set has an empty path component: {entry!r}")
        target = doc
        for key in keys[:-1]:
            nxt = target.setdefault(key, {})
            if not isinstance(nxt, dict):
                raise ScenarioError(f"--set path {path!r} crosses a non-object field")
            target = nxt
        target[keys[-1]] = _parse_override_value(raw_value.strip())
    return doc


def load_scenario_dict(ref: str | Path) -> dict:
    """Raw scenario document from a bundled name or a filesystem path."""
    name = str(ref)
    if name in BUNDLED:
        payload = (resources.files("slicesim") / "scenarios" / BUNDLED[name]).read_text()
        return json.loads(payload)
    path = Path(ref)
    if not path.exists():
        raise ScenarioError(f"scenario {name!r} is neither bundled "
                            f"({sorted(BUNDLED)}) nor an existing file")
    try:
        return json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ScenarioError(f"{path}: invalid JSON: {exc}") from exc


def load_scenario(ref: str | Path, overrides: list[str] | None = None) -> Scenario:
    doc = load_scenario_dict(ref)
    if overrides:
        doc = apply_overrides(doc, overrides)
    default_name = Path(str(ref)).stem
    return scenario_from_dict(doc, default_name=default_name)
