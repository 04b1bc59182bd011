import json
from pathlib import Path
from typing import Any, Dict, Sequence

import pandas as pd

from ..sim.trajectory import COLUMNS, Trajectory

# 17 significant digits round-trip every double
FLOAT_FORMAT = "%.17g"


class RunExporter:
    """Writes one run's trajectory, event logs and summary into an output directory."""

    TRAJECTORY_FILE = "trajectory.csv"
    SUMMARY_FILE = "summary.json"

    def __init__(self, out_dir: str = "output/run"):
        self.out_dir = Path(out_dir)

    def prepare(self) -> Path:
        self.out_dir.mkdir(parents=True, exist_ok=True)
        return self.out_dir

    def write_trajectory(self, traj: Trajectory) -> Path:
        path = self.out_dir / self.TRAJECTORY_FILE
        traj.samples[COLUMNS].to_csv(path, index=False, float_format=FLOAT_FORMAT)
        return path

    def write_events(self, player: int, event_times: Sequence[float]) -> Path:
        path = self.out_dir / f"events_p{player}.csv"
        pd.DataFrame({"t": list(event_times)}, dtype=float).to_csv(path, index=False, float_format=FLOAT_FORMAT)
        return path

    def write_summary(self, summary: Dict[str, Any]) -> Path:
        path = self.out_dir / self.SUMMARY_FILE
        with open(path, 'w', encoding='utf-8') as f:
            json.dump(summary, f, indent=2, ensure_ascii=False)
        return path

    def write_run(self, traj: Trajectory, summary: Dict[str, Any]) -> Dict[str, Path]:
        """Write all run artifacts.

        Returns:
            Mapping of artifact name to written path

        Raises:
            OSError: If the directory or a file cannot be written
        """
        self.prepare()
        return {
            "trajectory": self.write_trajectory(traj),
            "events_p1": self.write_events(1, traj.event_logs[0]),
            "events_p2": self.write_events(2, traj.event_logs[1]),
            "summary": self.write_summary(summary),
        }


def read_summary(path) -> Dict[str, Any]:
    with open(path, 'r', encoding='utf-8') as f:
        return json.load(f)


def write_sweep(table: pd.DataFrame, out_dir) -> Path:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    path = out / "sweep.csv"
    table.to_csv(path, index=False, float_format=FLOAT_FORMAT)
    return path
