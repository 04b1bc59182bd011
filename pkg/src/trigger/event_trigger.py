import math
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

from scipy import integrate

from ..errors import EmptyLog, InvalidParameters, NonMonotoneTime


@dataclass(frozen=True)
class TriggerPolicy:
    """Static per-player thresholds: player i fires when sigma_i |G_i| - |e_i| < 0."""

    sigma: Tuple[float, float]

    def __post_init__(self):
        s1, s2 = (float(s) for s in self.sigma)
        for s in (s1, s2):
            if not 0.0 < s < 1.0:
                raise InvalidParameters(f"Trigger thresholds must lie in (0, 1), got {self.sigma}")
        object.__setattr__(self, "sigma", (s1, s2))

    @property
    def sigma_bar(self) -> float:
        return max(self.sigma)

    def should_trigger(self, i: int, g_now: float, e_now: float) -> bool:
        if i not in (1, 2):
            raise InvalidParameters(f"Player index must be 1 or 2, got {i}")
        return self.sigma[i - 1] * abs(g_now) - abs(e_now) < 0

    def scaled(self, factor: float) -> "TriggerPolicy":
        return TriggerPolicy(sigma=(self.sigma[0] * factor, self.sigma[1] * factor))


class EventMonitor:
    """Zero-order-hold bookkeeping for one player: held gradient and event log."""

    def __init__(self, player: int, held_gradient: float, t0: float = 0.0):
        """
        Initialize the monitor with its first event.

        Args:
            player: Player index (1 or 2)
            held_gradient: Gradient estimate broadcast at t0
            t0: Time of the initial event
        """
        if player not in (1, 2):
            raise InvalidParameters(f"Player index must be 1 or 2, got {player}")
        self.player = player
        self.held_gradient = float(held_gradient)
        self.event_times: List[float] = [float(t0)]

    @property
    def last_event_time(self) -> float:
        return self.event_times[-1]

    def deviation(self, g_now: float) -> float:
        """e_i = held value minus current estimate."""
        return self.held_gradient - g_now

    def on_trigger(self, t: float, g_now: float) -> "EventMonitor":
        """Broadcast g_now at time t.

        Raises:
            NonMonotoneTime: If t is not after the previous event
        """
        if not t > self.event_times[-1]:
            raise NonMonotoneTime(
                f"Player {self.player}: event at t={t} is not after last event t={self.event_times[-1]}"
            )
        self.held_gradient = float(g_now)
        self.event_times.append(float(t))
        return self

    def __repr__(self) -> str:
        return (f"EventMonitor(player={self.player}, held_gradient={self.held_gradient!r}, "
                f"events={len(self.event_times)})")


def _check_bound_inputs(sigma_bar: float, hk_norm: float) -> None:
    # sigma_bar = 1 is admitted as the closed boundary of the formula
    if not 0.0 < sigma_bar <= 1.0:
        raise InvalidParameters(f"sigma_bar must lie in (0, 1], got {sigma_bar}")
    if not hk_norm > 0:
        raise InvalidParameters(f"||HK|| must be positive, got {hk_norm}")


def min_inter_event_time(sigma_bar: float, hk_norm: float) -> float:
    """Lower bound tau* on the inter-execution interval of the average system.

    tau* is the integral over [0, 1] of 1 / (b0 + b1 x + b2 x^2) with b0 = ||HK||/sigma_bar,
    b1 = 2||HK|| and b2 = sigma_bar ||HK||. The quadratic is a perfect square, so the
    integral reduces to sigma_bar / (||HK|| (1 + sigma_bar)).

    Raises:
        InvalidParameters: If sigma_bar is outside (0, 1] or hk_norm is not positive
    """
    _check_bound_inputs(sigma_bar, hk_norm)
    return sigma_bar / (hk_norm * (1.0 + sigma_bar))


def min_inter_event_time_quadrature(sigma_bar: float, hk_norm: float) -> float:
    """Numeric quadrature of the same integral, for cross-checking the closed form."""
    _check_bound_inputs(sigma_bar, hk_norm)
    b0 = hk_norm / sigma_bar
    b1 = 2.0 * hk_norm
    b2 = sigma_bar * hk_norm
    value, _ = integrate.quad(lambda x: 1.0 / (b0 + b1 * x + b2 * x * x), 0.0, 1.0,
                              epsabs=1e-14, epsrel=1e-13)
    return value


@dataclass(frozen=True)
class InterEventStats:
    count: int
    min_gap: Optional[float]
    mean_gap: Optional[float]

    def to_dict(self) -> dict:
        return {"count": self.count, "min_gap": self.min_gap, "mean_gap": self.mean_gap}


def inter_event_stats(event_times: Sequence[float]) -> InterEventStats:
    """Count events and summarize the gaps between consecutive events.

    Raises:
        EmptyLog: If the sequence is empty
    """
    times = [float(t) for t in event_times]
    if not times:
        raise EmptyLog("Event log is empty")
    if len(times) == 1:
        return InterEventStats(count=1, min_gap=None, mean_gap=None)
    gaps = [b - a for a, b in zip(times, times[1:])]
    return InterEventStats(count=len(times), min_gap=min(gaps), mean_gap=math.fsum(gaps) / len(gaps))
