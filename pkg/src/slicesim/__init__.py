"""slicesim: discrete-event simulator for slice-elastic, SDC-hardened
synchronous data-parallel training runs under a single global controller."""

from ._backend import BACKEND
from .controller import (
    ControllerConfig,
    Mode,
    ReplayOutcome,
    RunLedger,
    SdcMode,
    StepStatus,
    SuspicionVerdict,
    TrainingRun,
    detect_stragglers,
    judge_step,
    replay_and_localize,
    run_training,
    step_duration,
)
from .faults import FaultEvent, FaultKind, FaultRates, FaultTrace, sample_trace
from .metrics import GoodputReport, goodput, merge_reports, overhead_split, replay_stats
from .scenario import Scenario, load_scenario
from .topology import ClusterTopology, FleetState, build_topology
from .workload import ChecksumVector, StepInput, StepOutcome, device_digest, execute_step, metric_of

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "ChecksumVector",
    "ClusterTopology",
    "ControllerConfig",
    "FaultEvent",
    "FaultKind",
    "FaultRates",
    "FaultTrace",
    "FleetState",
    "GoodputReport",
    "Mode",
    "ReplayOutcome",
    "RunLedger",
    "Scenario",
    "SdcMode",
    "StepInput",
    "StepOutcome",
    "StepStatus",
    "SuspicionVerdict",
    "TrainingRun",
    "build_topology",
    "detect_stragglers",
    "device_digest",
    "execute_step",
    "goodput",
    "judge_step",
    "load_scenario",
    "merge_reports",
    "metric_of",
    "overhead_split",
    "replay_and_localize",
    "replay_stats",
    "run_training",
    "sample_trace",
    "step_duration",
    "__version__",
]
