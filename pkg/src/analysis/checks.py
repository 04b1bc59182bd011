import logging
import math
from dataclasses import dataclass
from enum import Enum
from typing import List, Optional, Sequence, Tuple

import numpy as np

from ..errors import InvalidParameters, NotConverged
from ..sim.closed_loop import run
from ..sim.scenario import Mode, ScenarioConfig
from ..sim.trajectory import Trajectory
from ..trigger.event_trigger import inter_event_stats
from .stability import StabilityReport

logger = logging.getLogger(__name__)

DEFAULT_OMEGA_SCALES = (1, 2, 4)


class DecayTarget(str, Enum):
    THETA_ERR = "theta_err"
    G_NORM = "g_norm"


@dataclass(frozen=True)
class DecayFit:
    m: float
    M_bar: float
    floor: float
    t_window: float
    coverage: float

    def to_dict(self) -> dict:
        return {"m": self.m, "M_bar": self.M_bar, "floor": self.floor,
                "t_window": self.t_window, "coverage": self.coverage}


def fit_decay(t: Sequence[float], r: Sequence[float]) -> DecayFit:
    """Fit r(t) <= M_bar exp(-m t) + floor over the transient window.

    The floor is the median of the last 10% of samples and the window ends when r
    first drops to 10x the floor. m comes from a least-squares line through
    log(r - floor); M_bar is then the smallest amplitude covering the window.

    Raises:
        NotConverged: If the final residual is not below 10% of the initial one,
            or the window leaves fewer than two usable samples
    """
    t = np.asarray(t, dtype=float)
    r = np.asarray(r, dtype=float)
    if len(r) < 3 or not r[-1] < 0.1 * r[0]:
        raise NotConverged(f"Residual did not drop below 10% of its initial value ({r[0]:.4g} -> {r[-1]:.4g})")
    t = t - t[0]

    n_tail = max(1, int(math.ceil(0.1 * len(r))))
    floor = float(np.median(r[-n_tail:]))
    reached = np.nonzero(r <= 10.0 * floor)[0]
    end = int(reached[0]) if len(reached) and reached[0] > 0 else len(r) - 1

    excess = r[:end + 1] - floor
    usable = excess > 0
    if np.count_nonzero(usable) < 2:
        raise NotConverged("Transient window has fewer than two samples above the floor")
    slope, _ = np.polyfit(t[:end + 1][usable], np.log(excess[usable]), 1)
    m = -float(slope)
    if not m > 0:
        raise NotConverged(f"Fitted decay rate is not positive (m={m:.4g})")

    M_bar = float(np.max(excess[usable] * np.exp(m * t[:end + 1][usable])))
    envelope = M_bar * np.exp(-m * t) + floor
    coverage = float(np.mean(r <= envelope * (1.0 + 1e-12)))
    return DecayFit(m=m, M_bar=M_bar, floor=floor, t_window=float(t[end]), coverage=coverage)


def residual_series(traj: Trajectory, target: DecayTarget) -> np.ndarray:
    if DecayTarget(target) is DecayTarget.G_NORM:
        return np.hypot(traj.samples["g_hat1"].to_numpy(), traj.samples["g_hat2"].to_numpy())
    star = traj.theta_star().as_array()
    theta = traj.samples[["theta1", "theta2"]].to_numpy()
    return np.linalg.norm(theta - star, axis=1)


def decay_fit(traj: Trajectory, target: DecayTarget = DecayTarget.THETA_ERR) -> DecayFit:
    """Fit the exponential envelope of a recorded run, in seconds."""
    return fit_decay(traj.to_seconds(), residual_series(traj, target))


def averaging_gap(config: ScenarioConfig,
                  scales: Sequence[int] = DEFAULT_OMEGA_SCALES) -> List[Tuple[int, float]]:
    """Sup-norm gap between the full and average estimation errors for scaled frequencies.

    Both runs share dt and record_stride, so sample n is at t = n dt in the full run
    and at t_bar = omega n dt in the average run.
    """
    results = []
    for scale in scales:
        scaled = config.replace(dither=config.dither.scaled(scale))
        full = run(scaled.replace(mode=Mode.FULL))
        average = run(scaled.replace(mode=Mode.AVERAGE))
        gap = float(np.max(np.linalg.norm(full.theta_tilde() - average.theta_tilde(), axis=1)))
        logger.debug("omega scale %s: gap %.6g", scale, gap)
        results.append((scale, gap))
    return results


@dataclass(frozen=True)
class LyapunovCheck:
    skipped: bool
    pairs: int = 0
    contraction_fraction: Optional[float] = None
    v_envelope_fraction: Optional[float] = None
    theta_envelope_fraction: Optional[float] = None

    def to_dict(self) -> dict:
        return {
            "skipped": self.skipped,
            "pairs": self.pairs,
            "contraction_fraction": self.contraction_fraction,
            "v_envelope_fraction": self.v_envelope_fraction,
            "theta_envelope_fraction": self.theta_envelope_fraction,
        }


def _require_average(traj: Trajectory) -> None:
    if traj.config.mode is not Mode.AVERAGE:
        raise InvalidParameters(f"Check needs an average-mode trajectory, got {traj.config.mode.value}")


def check_lyapunov_decay(traj: Trajectory, report: StabilityReport) -> LyapunovCheck:
    """Check V_av = G^T P G against the event-to-event contraction and global envelopes.

    Event times that fall between recorded samples are ignored.
    """
    _require_average(traj)
    if not report.within_bound:
        logger.warning("Skipping Lyapunov check: sigma_bar=%.4f >= sigma_bar_max=%.4f",
                       report.sigma_bar, report.sigma_bar_max)
        return LyapunovCheck(skipped=True)

    t_bar = traj.samples["t"].to_numpy()
    g = traj.samples[["g_hat1", "g_hat2"]].to_numpy()
    V = np.einsum("ni,ij,nj->n", g, report.P, g)
    rate = report.decay_rate / report.omega
    slack = 1.0 + 1e-9

    merged = np.unique(np.concatenate([np.asarray(log) for log in traj.event_logs]))
    step = traj.config.dt * traj.time_scale * traj.config.record_stride
    idx = np.rint(merged / step).astype(int)
    on_grid = (idx < len(t_bar)) & np.isclose(idx * step, merged, rtol=0.0, atol=1e-9 * max(step, 1.0))
    idx = np.unique(idx[on_grid])

    pairs = len(idx) - 1
    if pairs > 0:
        v1, v2 = V[idx[:-1]], V[idx[1:]]
        gaps = t_bar[idx[1:]] - t_bar[idx[:-1]]
        contraction = float(np.mean(v2 <= np.exp(-rate * gaps) * v1 * slack + 1e-300))
    else:
        contraction = 1.0

    v_envelope = float(np.mean(V <= np.exp(-rate * t_bar) * V[0] * slack + 1e-300))
    theta_tilde = np.linalg.norm(traj.theta_tilde(), axis=1)
    theta_bound = np.exp(-rate * t_bar / 2.0) * report.m_theta * theta_tilde[0]
    theta_envelope = float(np.mean(theta_tilde <= theta_bound * slack + 1e-300))
    return LyapunovCheck(skipped=False, pairs=max(pairs, 0), contraction_fraction=contraction,
                         v_envelope_fraction=v_envelope, theta_envelope_fraction=theta_envelope)


@dataclass(frozen=True)
class MinGapCheck:
    bound: float
    min_gaps: Tuple[Optional[float], Optional[float]]

    @property
    def player_passed(self) -> Tuple[bool, bool]:
        """Per-player verdict; a player with fewer than two events passes."""
        first, second = (g is None or g >= self.bound for g in self.min_gaps)
        return first, second

    @property
    def passed(self) -> bool:
        return all(self.player_passed)

    def to_dict(self) -> dict:
        return {"bound": self.bound, "min_gaps": list(self.min_gaps),
                "player_passed": list(self.player_passed), "passed": self.passed}


def check_min_gap(traj: Trajectory, report: StabilityReport) -> MinGapCheck:
    """Compare per-player minimum inter-event gaps (scaled time) against omega tau* - dt_bar."""
    _require_average(traj)
    dt_bar = traj.config.dt * traj.time_scale
    bound = report.omega * report.tau_star - dt_bar
    gaps = tuple(inter_event_stats(log).min_gap for log in traj.event_logs)
    return MinGapCheck(bound=bound, min_gaps=gaps)
