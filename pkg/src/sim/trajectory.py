from dataclasses import dataclass
from typing import List, Tuple

import numpy as np
import pandas as pd

from ..game.quadratic_game import ActionPair
from .scenario import ScenarioConfig

COLUMNS = [
    "t", "theta1", "theta2", "theta_hat1", "theta_hat2",
    "g_hat1", "g_hat2", "e1", "e2", "u1", "u2", "J1", "J2",
]


@dataclass
class Trajectory:
    """Recorded samples and per-player event logs of one run.

    In average mode the ``t`` column and the event times are in the scaled time
    t_bar = omega t; ``time_scale`` holds omega (1.0 otherwise).
    """

    samples: pd.DataFrame
    event_logs: Tuple[List[float], List[float]]
    config: ScenarioConfig
    time_scale: float = 1.0
    detection_slack: Tuple[float, float] = (0.0, 0.0)

    def __len__(self) -> int:
        return len(self.samples)

    @property
    def event_counts(self) -> Tuple[int, int]:
        return len(self.event_logs[0]), len(self.event_logs[1])

    @property
    def final(self) -> pd.Series:
        return self.samples.iloc[-1]

    def theta_star(self) -> ActionPair:
        return self.config.game.nash_equilibrium()

    def to_seconds(self) -> np.ndarray:
        return self.samples["t"].to_numpy() / self.time_scale

    def event_times_seconds(self, i: int) -> np.ndarray:
        return np.asarray(self.event_logs[i - 1], dtype=float) / self.time_scale

    def theta_tilde(self) -> np.ndarray:
        """Estimation error theta_hat - theta*, shape (n, 2)."""
        star = self.theta_star().as_array()
        return self.samples[["theta_hat1", "theta_hat2"]].to_numpy() - star

    def trigger_overshoot(self) -> Tuple[float, float]:
        """Largest |e_i| - sigma_i |G_i| per player, over recorded samples and the
        pre-update deviations at detected events.

        Non-positive values mean the trigger condition was never violated on the grid.
        """
        sigma = self.config.policy.sigma
        result = []
        for k in (1, 2):
            g = self.samples[f"g_hat{k}"].to_numpy()
            e = self.samples[f"e{k}"].to_numpy()
            recorded = float(np.max(np.abs(e) - sigma[k - 1] * np.abs(g)))
            result.append(max(recorded, self.detection_slack[k - 1]))
        return result[0], result[1]
