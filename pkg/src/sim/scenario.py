import hashlib
import json
import math
from dataclasses import dataclass, replace
from enum import Enum
from typing import Any, Dict, Optional, Tuple

import numpy as np

from ..dither.dither_plan import DitherPlan
from ..errors import ValidationError
from ..game.quadratic_game import QuadraticGame, hurwitz_check
from ..trigger.event_trigger import TriggerPolicy


class Mode(str, Enum):
    FULL = "full"
    AVERAGE = "average"
    PERIODIC = "periodic"


class Integrator(str, Enum):
    EULER = "euler"
    RK4 = "rk4"


@dataclass(frozen=True)
class ScenarioConfig:
    """Everything needed to reproduce one closed-loop run."""

    game: QuadraticGame
    dither: DitherPlan
    policy: TriggerPolicy
    gains: Tuple[float, float]
    theta_hat0: Tuple[float, float]
    dt: float = 1e-3
    t_final: float = 250.0
    mode: Mode = Mode.FULL
    baseline_h: Optional[float] = None
    record_stride: int = 1
    integrator: Integrator = Integrator.EULER
    continuous_control: bool = False
    name: str = "scenario"
    reference_payoff: Optional[Tuple[float, float]] = None

    def __post_init__(self):
        object.__setattr__(self, "mode", Mode(self.mode))
        object.__setattr__(self, "integrator", Integrator(self.integrator))
        object.__setattr__(self, "gains", tuple(float(k) for k in self.gains))
        object.__setattr__(self, "theta_hat0", tuple(float(x) for x in self.theta_hat0))
        if self.reference_payoff is not None:
            object.__setattr__(self, "reference_payoff", tuple(float(x) for x in self.reference_payoff))

    @property
    def gain_matrix(self) -> np.ndarray:
        return np.diag(self.gains)

    @property
    def n_steps(self) -> int:
        return int(round(self.t_final / self.dt))

    def replace(self, **changes: Any) -> "ScenarioConfig":
        return replace(self, **changes)

    def validate(self) -> None:
        """Check every invariant of the run, naming the offending field.

        Raises:
            ValidationError: On the first violated invariant
        """
        if not (math.isfinite(self.dt) and self.dt > 0):
            raise ValidationError("simulation.dt", f"must be positive, got {self.dt}")
        if not (math.isfinite(self.t_final) and self.t_final >= 0):
            raise ValidationError("simulation.t_final", f"must be non-negative, got {self.t_final}")
        if not (isinstance(self.record_stride, int) and self.record_stride >= 1):
            raise ValidationError("simulation.record_stride", f"must be a positive integer, got {self.record_stride}")
        if len(self.gains) != 2 or not all(k > 0 for k in self.gains):
            raise ValidationError("gains", f"must be two positive reals, got {self.gains}")
        if len(self.theta_hat0) != 2 or not all(math.isfinite(x) for x in self.theta_hat0):
            raise ValidationError("theta_hat0", f"must be two finite reals, got {self.theta_hat0}")
        if not hurwitz_check(self.gain_matrix @ self.game.pseudo_hessian):
            raise ValidationError("gains", "K H is not Hurwitz for the configured game")
        if self.mode is Mode.PERIODIC:
            if self.baseline_h is None or not self.baseline_h >= self.dt:
                raise ValidationError("simulation.baseline_h", f"periodic mode needs h >= dt, got {self.baseline_h}")
        if self.mode is Mode.AVERAGE and self.game.is_singular():
            raise ValidationError("game", "average mode needs an invertible pseudo-Hessian")

    def to_dict(self) -> Dict[str, Any]:
        return {
            "name": self.name,
            "game": self.game.to_dict(),
            "dither": self.dither.to_dict(),
            "trigger": {"sigma": list(self.policy.sigma)},
            "gains": list(self.gains),
            "theta_hat0": list(self.theta_hat0),
            "simulation": {
                "dt": self.dt,
                "t_final": self.t_final,
                "mode": self.mode.value,
                "baseline_h": self.baseline_h,
                "record_stride": self.record_stride,
                "integrator": self.integrator.value,
                "continuous_control": self.continuous_control,
            },
            "reference_payoff": list(self.reference_payoff) if self.reference_payoff else None,
        }

    def config_hash(self) -> str:
        """SHA-256 of the canonical JSON text of the config."""
        canonical = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canonical.encode("utf-8")).hexdigest()
