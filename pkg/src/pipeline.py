"""
Run orchestration: config -> initial map -> flow -> monitor -> files.

Exit codes follow the CLI contract:
    0  every enabled check passed
    1  at least one check failed
    2  configuration or initial-data error
    3  blow-up during the flow
"""

from dataclasses import dataclass, field
from pathlib import Path
from typing import List, Optional

from src.config.settings import RunConfig, save_config
from src.flow.engine import evolve
from src.generators.initial_data import build_initial_field
from src.models.errors import GMCFError, InvalidFieldError, NotAreaDecreasingError, NotLagrangianError, SnapshotFormatError
from src.models.fields import FlowState, GeometrySnapshot, TensorSValues
from src.models.schema import MonitorReport
from src.storage.reports import write_report, write_timeseries
from src.storage.snapshots import write_snapshot
from src.utils.logger import get_logger
from src.validators.estimate_monitor import EstimateMonitor

logger = get_logger(__name__)

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_CONFIG_ERROR = 2
EXIT_BLOW_UP = 3

SETUP_ERRORS = (InvalidFieldError, NotAreaDecreasingError, NotLagrangianError, SnapshotFormatError)


@dataclass
class RunResult:
    """Outcome of run_case."""
    exit_code: int
    report: Optional[MonitorReport] = None
    artifacts: List[Path] = field(default_factory=list)
    error: Optional[str] = None


class SnapshotRecorder:
    """Writes a binary snapshot of the flow state at every emission time."""

    def __init__(self, directory: Path):
        self.directory = directory
        self.state: Optional[FlowState] = None
        self.written: List[Path] = []

    def on_step(self, previous: FlowState, current: FlowState) -> None:
        self.state = current

    def __call__(self, t: float, snapshot: GeometrySnapshot, tensor: TensorSValues) -> None:
        name = f"snap_{len(self.written) // 2:05d}"
        self.written.extend(write_snapshot(self.state, snapshot, self.directory / name))


def exit_code_for(report: MonitorReport) -> int:
    if report.blow_up is not None:
        return EXIT_BLOW_UP
    return EXIT_OK if report.passed else EXIT_CHECK_FAILED


def run_case(cfg: RunConfig, output_dir: Optional[str] = None) -> RunResult:
    """
    Evolve the configured map, monitor it and write the outputs.

    Args:
        cfg: Validated run configuration
        output_dir: Overrides cfg.output.directory

    Returns:
        RunResult with the report, the written files and the exit code
    """
    out = Path(output_dir or cfg.output.directory)
    out.mkdir(parents=True, exist_ok=True)
    artifacts: List[Path] = []

    resolved = out / "resolved_config.cfg"
    save_config(cfg, str(resolved))
    artifacts.append(resolved)

    try:
        initial = build_initial_field(cfg)
        state = FlowState(initial.t, initial.field, initial.step_count)
        monitor = EstimateMonitor(cfg.checks, cfg.enabled_checks(), cfg.flow.cfl,
                                  lagrangian=cfg.map.kind == "potential")
        monitor.initialize(state)
    except SETUP_ERRORS as exc:
        logger.error(f"Setup failed: {exc}")
        return RunResult(EXIT_CONFIG_ERROR, artifacts=artifacts, error=str(exc))

    observers = [monitor]
    hooks = [monitor.on_step]
    recorder = None
    if "snapshot" in cfg.output.formats:
        recorder = SnapshotRecorder(out / "snapshots")
        recorder.state = state
        observers.append(recorder)
        hooks.append(recorder.on_step)

    summary = evolve(state, cfg.flow, observers=observers, step_hooks=hooks)
    report = monitor.finalize(summary.blow_up)
    report.metadata.update({
        "grid": [state.field.grid.n1, state.field.grid.n2, state.field.grid.L1, state.field.grid.L2],
        "kind": cfg.map.kind,
        "seed": cfg.seed,
        "target_scale": initial.scale,
        "t_start": summary.initial_state.t,
        "t_final": summary.final_state.t,
        "steps": summary.steps,
        "min_dt": summary.min_dt,
        "max_dt": summary.max_dt,
    })
    if recorder is not None:
        artifacts.extend(recorder.written)

    try:
        if "csv" in cfg.output.formats:
            artifacts.append(write_timeseries(report, out / "timeseries.csv"))
        if "json" in cfg.output.formats:
            artifacts.append(write_report(report, out / "report.json"))
    except (OSError, GMCFError) as exc:
        logger.error(f"Could not write outputs to {out}: {exc}")
        raise

    code = exit_code_for(report)
    logger.info(f"Run finished with exit code {code}; outputs in {out}")
    return RunResult(code, report, artifacts)
