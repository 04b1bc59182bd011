import json
import logging
import math
import sys
from concurrent.futures import ThreadPoolExecutor, as_completed
from dataclasses import asdict, dataclass, fields
from enum import Enum
from typing import Any, Dict, List, Optional, Sequence

import numpy as np
import pandas as pd
from tqdm import tqdm

from ..analysis.stability import StabilityReport, build_report
from ..errors import InvalidParameters, NesError, ParseError, SingularHessian, ValidationError
from ..report.html_generator import RunReportGenerator
from ..sim.closed_loop import ClosedLoopSimulator
from ..sim.scenario import Mode, ScenarioConfig
from ..sim.trajectory import Trajectory
from ..trigger.event_trigger import inter_event_stats
from ..utils.exporter import RunExporter, write_sweep
from ..utils.scenario_loader import load_scenario

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_INVALID = 2
EXIT_SIMULATION = 3
EXIT_IO = 4

SWEEP_COLUMNS = ["value", "final_residual", "event_count_1", "event_count_2", "min_gap_1", "min_gap_2"]


class SweepParameter(str, Enum):
    OMEGA_SCALE = "omega_scale"
    SIGMA_SCALE = "sigma_scale"


@dataclass
class SweepResult:
    """Sweep table plus the values whose run failed (kept in the table as NaN rows)."""

    table: pd.DataFrame
    failed: List[float]

    @property
    def failure_count(self) -> int:
        return len(self.failed)


@dataclass
class RunSummary:
    """Headline numbers of one run, as written to summary.json."""

    scenario: str
    mode: str
    config_hash: str
    time_scale: float
    final_theta: List[float]
    final_theta_hat: List[float]
    final_residual: Optional[float]
    event_counts: List[int]
    min_gap: List[Optional[float]]
    mean_gap: List[Optional[float]]
    trigger_overshoot: List[float]
    nash_equilibrium: Optional[List[float]] = None
    nash_payoff: Optional[List[float]] = None
    reference_payoff: Optional[List[float]] = None
    stability: Optional[Dict[str, Any]] = None

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "RunSummary":
        known = {f.name for f in fields(cls)}
        return cls(**{k: v for k, v in data.items() if k in known})


def summarize(traj: Trajectory, report: Optional[StabilityReport] = None) -> RunSummary:
    """Collect the summary of a finished run.

    final_residual is ||theta_hat(t_final) - theta*||, or None when theta* does not exist.
    """
    config = traj.config
    final = traj.final
    theta_hat = [float(final["theta_hat1"]), float(final["theta_hat2"])]
    try:
        star = traj.theta_star()
        nash = [star.theta1, star.theta2]
        residual = float(math.hypot(theta_hat[0] - star.theta1, theta_hat[1] - star.theta2))
        nash_payoff = list(config.game.payoff(star))
    except SingularHessian:
        nash, residual, nash_payoff = None, None, None

    stats = [inter_event_stats(log) for log in traj.event_logs]
    return RunSummary(
        scenario=config.name,
        mode=config.mode.value,
        config_hash=config.config_hash(),
        time_scale=traj.time_scale,
        final_theta=[float(final["theta1"]), float(final["theta2"])],
        final_theta_hat=theta_hat,
        final_residual=residual,
        event_counts=[s.count for s in stats],
        min_gap=[s.min_gap for s in stats],
        mean_gap=[s.mean_gap for s in stats],
        trigger_overshoot=list(traj.trigger_overshoot()),
        nash_equilibrium=nash,
        nash_payoff=nash_payoff,
        reference_payoff=list(config.reference_payoff) if config.reference_payoff else None,
        stability=report.to_dict() if report else None,
    )


def apply_overrides(config: ScenarioConfig, mode: Optional[str] = None, dt: Optional[float] = None,
                    t_final: Optional[float] = None) -> ScenarioConfig:
    """Apply command-line overrides and re-validate.

    Periodic mode without a configured baseline step uses h = dt.
    """
    changes: Dict[str, Any] = {}
    if mode is not None:
        changes["mode"] = Mode(mode)
    if dt is not None:
        changes["dt"] = float(dt)
    if t_final is not None:
        changes["t_final"] = float(t_final)
    if changes:
        config = config.replace(**changes)
    if config.mode is Mode.PERIODIC and config.baseline_h is None:
        config = config.replace(baseline_h=config.dt)
    config.validate()
    return config


def _error(message: str) -> None:
    print(f"Error: {message}", file=sys.stderr)


def cmd_run(path: str, out_dir: str, mode: Optional[str] = None, dt: Optional[float] = None,
            t_final: Optional[float] = None, html: bool = False, template_dir: str = "templates") -> int:
    """Run one scenario and write trajectory.csv, events_p1.csv, events_p2.csv and summary.json.

    Returns:
        Exit code (0 ok, 2 invalid scenario, 3 simulation error, 4 I/O error)
    """
    try:
        config = apply_overrides(load_scenario(path), mode=mode, dt=dt, t_final=t_final)
    except (ParseError, ValidationError) as e:
        _error(str(e))
        return EXIT_INVALID
    except OSError as e:
        _error(f"cannot read scenario: {e}")
        return EXIT_IO

    print(f"  Scenario {config.name}: mode={config.mode.value}, dt={config.dt}, t_final={config.t_final}")
    try:
        traj = ClosedLoopSimulator(config).run()
        report = build_report(config)
        summary = summarize(traj, report)
    except NesError as e:
        where = f" at t={e.t}" if getattr(e, "t", None) is not None else ""
        _error(f"simulation failed{where}: {e}")
        return EXIT_SIMULATION

    try:
        written = RunExporter(out_dir).write_run(traj, summary.to_dict())
        if html:
            generator = RunReportGenerator(template_dir=template_dir)
            written["report"] = generator.save_html(summary, traj, f"{out_dir}/report.html")
    except OSError as e:
        _error(f"cannot write output: {e}")
        return EXIT_IO

    for name, file_path in written.items():
        print(f"  Saved {name} to: {file_path}")
    print(f"  Final residual: {summary.final_residual}, events: {summary.event_counts}")
    return EXIT_OK


def sweep_config(config: ScenarioConfig, parameter: SweepParameter, value: float) -> ScenarioConfig:
    if SweepParameter(parameter) is SweepParameter.OMEGA_SCALE:
        return config.replace(dither=config.dither.scaled(value))
    return config.replace(policy=config.policy.scaled(value))


def _sweep_row(config: ScenarioConfig, parameter: SweepParameter, value: float) -> Dict[str, float]:
    traj = ClosedLoopSimulator(sweep_config(config, parameter, value)).run()
    summary = summarize(traj)
    return {
        "value": value,
        "final_residual": summary.final_residual,
        "event_count_1": summary.event_counts[0],
        "event_count_2": summary.event_counts[1],
        "min_gap_1": summary.min_gap[0],
        "min_gap_2": summary.min_gap[1],
    }


def run_sweep(config: ScenarioConfig, parameter: SweepParameter, values: Sequence[float],
              max_workers: int = 4) -> SweepResult:
    """Run one scenario per value in parallel.

    A failed run is logged and kept as a row of NaNs so the table stays aligned with
    ``values``.

    Raises:
        ValidationError: If ``values`` is empty
    """
    if not values:
        raise ValidationError("values", "sweep needs at least one value")
    parameter = SweepParameter(parameter)
    rows: Dict[int, Dict[str, float]] = {}
    failed: List[int] = []

    with ThreadPoolExecutor(max_workers=max_workers) as executor:
        future_to_index = {
            executor.submit(_sweep_row, config, parameter, value): index
            for index, value in enumerate(values)
        }

        with tqdm(total=len(values), desc=f"Sweeping {parameter.value}") as pbar:
            for future in as_completed(future_to_index):
                index = future_to_index[future]
                try:
                    rows[index] = future.result()
                except Exception as e:
                    logger.warning("Sweep run %s=%s failed: %s", parameter.value, values[index], e)
                    rows[index] = {column: np.nan for column in SWEEP_COLUMNS}
                    rows[index]["value"] = values[index]
                    failed.append(index)
                pbar.update(1)

    table = pd.DataFrame([rows[i] for i in range(len(values))], columns=SWEEP_COLUMNS)
    return SweepResult(table=table, failed=[values[i] for i in sorted(failed)])


def cmd_sweep(path: str, parameter: str, values: Sequence[float], out_dir: str) -> int:
    """Sweep omega_scale or sigma_scale and write sweep.csv.

    The table is written even when some runs fail; the exit code is then EXIT_SIMULATION.
    """
    try:
        config = load_scenario(path)
        result = run_sweep(config, SweepParameter(parameter), list(values))
    except (ParseError, ValidationError) as e:
        _error(str(e))
        return EXIT_INVALID
    except ValueError as e:
        _error(f"unknown sweep parameter: {e}")
        return EXIT_INVALID
    except OSError as e:
        _error(f"cannot read scenario: {e}")
        return EXIT_IO

    try:
        sweep_path = write_sweep(result.table, out_dir)
    except OSError as e:
        _error(f"cannot write output: {e}")
        return EXIT_IO
    print(f"  Saved sweep to: {sweep_path}")
    if result.failed:
        _error(f"{result.failure_count} of {len(result.table)} sweep runs failed: {parameter}={result.failed}")
        return EXIT_SIMULATION
    return EXIT_OK


def cmd_report(path: str, q_scale: float = 1.0) -> int:
    """Print the stability report of a scenario as JSON."""
    try:
        config = load_scenario(path)
        report = build_report(config, Q=q_scale * np.eye(2))
    except (ParseError, ValidationError, InvalidParameters) as e:
        _error(str(e))
        return EXIT_INVALID
    except OSError as e:
        _error(f"cannot read scenario: {e}")
        return EXIT_IO
    except NesError as e:
        _error(str(e))
        return EXIT_SIMULATION
    print(json.dumps(report.to_dict(), indent=2))
    return EXIT_OK
