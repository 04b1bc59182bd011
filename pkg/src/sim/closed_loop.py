import logging
import math
from dataclasses import dataclass, field
from typing import List, Tuple

import numpy as np
import pandas as pd

from ..dither.dither_plan import DitherPlan
from ..errors import InvalidParameters, NumericOverflow
from ..game.quadratic_game import ActionLike, QuadraticGame
from ..trigger.event_trigger import EventMonitor
from .scenario import Integrator, Mode, ScenarioConfig
from .trajectory import COLUMNS, Trajectory

logger = logging.getLogger(__name__)

# Magnitude past which a run is reported as diverged
DIVERGENCE_LIMIT = 1e12


@dataclass(frozen=True)
class Measurement:
    """Probed action, measured payoffs and demodulated gradient estimates at one instant."""

    theta: Tuple[float, float]
    y: Tuple[float, float]
    g_hat: Tuple[float, float]


def _measure_values(game: QuadraticGame, a: Tuple[float, float], w: Tuple[float, float],
                    theta_hat1: float, theta_hat2: float, t: float) -> Tuple[float, ...]:
    s1 = math.sin(w[0] * t)
    s2 = math.sin(w[1] * t)
    theta1 = theta_hat1 + a[0] * s1
    theta2 = theta_hat2 + a[1] * s2
    y1, y2 = game.payoff_values(theta1, theta2)
    g1 = (2.0 / a[0]) * s1 * y1
    g2 = (2.0 / a[1]) * s2 * y2
    return theta1, theta2, y1, y2, g1, g2


def measure(game: QuadraticGame, dither: DitherPlan, theta_hat: ActionLike, t: float) -> Measurement:
    """Probe the game around theta_hat at time t.

    theta_i = theta_hat_i + S_i(t), y_i = J_i(theta), G_hat_i = M_i(t) y_i.
    """
    theta_hat1, theta_hat2 = (float(x) for x in theta_hat)
    theta1, theta2, y1, y2, g1, g2 = _measure_values(
        game, dither.a, dither.omega_values, theta_hat1, theta_hat2, t)
    return Measurement(theta=(theta1, theta2), y=(y1, y2), g_hat=(g1, g2))


@dataclass
class ClosedLoopState:
    """Mutable loop state between two grid points.

    ``g_hat`` and ``u_held`` are the values sensed at ``t``; ``theta_hat`` is the
    estimate the next integration starts from.
    """

    step: int
    t: float
    theta_hat: Tuple[float, float]
    g_hat: Tuple[float, float]
    monitors: Tuple[EventMonitor, EventMonitor]
    u_held: Tuple[float, float]
    overshoot: List[float] = field(default_factory=lambda: [0.0, 0.0])


def _guard(values, t: float, what: str) -> None:
    for v in values:
        if not math.isfinite(v) or abs(v) > DIVERGENCE_LIMIT:
            raise NumericOverflow(f"{what} diverged at t={t:.6g} (value {v!r})", t=t)


class ClosedLoopSimulator:
    """Fixed-step integrator for the event-triggered extremum seeking loop.

    Each grid point runs sense (measure, evaluate triggers, record) and then
    integrate, so an event fired at t_n already drives the step to t_{n+1}.
    """

    def __init__(self, config: ScenarioConfig, validate: bool = True):
        """
        Initialize the simulator.

        Args:
            config: Scenario to run
            validate: Run config.validate() first; disable only for degenerate test games
        """
        if validate:
            config.validate()
        self.config = config
        self.game = config.game
        self.mode = config.mode
        self._a = config.dither.a
        self._w = config.dither.omega_values
        self._k = config.gains
        self._grid_steps = 1
        if self.mode is Mode.PERIODIC:
            self._grid_steps = max(1, int(round(config.baseline_h / config.dt)))

        self.omega = config.dither.base_frequency
        if self.mode is Mode.AVERAGE:
            H = self.game.pseudo_hessian
            self._hk = H @ config.gain_matrix
            self._h_inv = np.linalg.inv(H)
            self._theta_star = self.game.nash_equilibrium().as_array()
            self.time_scale = self.omega
        else:
            self.time_scale = 1.0
        self.step_size = config.dt * self.time_scale

    def initial_state(self) -> ClosedLoopState:
        theta_hat = self.config.theta_hat0
        if self.mode is Mode.AVERAGE:
            g0 = self.game.pseudo_gradient(theta_hat)
            g = (float(g0[0]), float(g0[1]))
        else:
            *_, g1, g2 = _measure_values(self.game, self._a, self._w, theta_hat[0], theta_hat[1], 0.0)
            g = (g1, g2)
        monitors = (EventMonitor(1, g[0], 0.0), EventMonitor(2, g[1], 0.0))
        u = (self._k[0] * g[0], self._k[1] * g[1])
        return ClosedLoopState(step=0, t=0.0, theta_hat=theta_hat, g_hat=g, monitors=monitors, u_held=u)

    def _update_held(self, state: ClosedLoopState, g: Tuple[float, float]) -> Tuple[float, float]:
        """Apply the trigger rule (or periodic grid) and return the deviations e_i."""
        deviations = []
        for k, monitor in enumerate(state.monitors):
            if self.config.continuous_control:
                monitor.held_gradient = g[k]
            elif state.step > 0:
                if self.mode is Mode.PERIODIC:
                    due = state.step % self._grid_steps == 0
                else:
                    e_before = monitor.deviation(g[k])
                    due = self.config.policy.should_trigger(k + 1, g[k], e_before)
                    if due:
                        slack = abs(e_before) - self.config.policy.sigma[k] * abs(g[k])
                        state.overshoot[k] = max(state.overshoot[k], slack)
                if due:
                    monitor.on_trigger(state.t, g[k])
            deviations.append(monitor.deviation(g[k]))
        m1, m2 = state.monitors
        state.u_held = (self._k[0] * m1.held_gradient, self._k[1] * m2.held_gradient)
        return deviations[0], deviations[1]

    def sense(self, state: ClosedLoopState) -> Tuple[float, ...]:
        """Measure, evaluate triggers and return the sample row for grid point ``state.step``."""
        if self.mode is Mode.AVERAGE:
            g = state.g_hat
            theta = tuple(self._theta_star + self._h_inv @ np.asarray(g))
            theta1, theta2 = float(theta[0]), float(theta[1])
            y1, y2 = self.game.payoff_values(theta1, theta2)
        else:
            theta1, theta2, y1, y2, g1, g2 = _measure_values(
                self.game, self._a, self._w, state.theta_hat[0], state.theta_hat[1], state.t)
            g = (g1, g2)
            state.g_hat = g
        _guard(g, state.t, "gradient estimate")
        e1, e2 = self._update_held(state, g)
        u1, u2 = state.u_held
        return (state.t, theta1, theta2, state.theta_hat[0], state.theta_hat[1],
                g[0], g[1], e1, e2, u1, u2, y1, y2)

    def _control_rate(self, theta_hat1: float, theta_hat2: float, t: float) -> np.ndarray:
        *_, g1, g2 = _measure_values(self.game, self._a, self._w, theta_hat1, theta_hat2, t)
        return np.array([self._k[0] * g1, self._k[1] * g2])

    def _integrate_full(self, state: ClosedLoopState) -> ClosedLoopState:
        dt = self.config.dt
        theta = np.array(state.theta_hat)
        if self.config.continuous_control and self.config.integrator is Integrator.RK4:
            t = state.t
            k1 = self._control_rate(*theta, t)
            k2 = self._control_rate(*(theta + 0.5 * dt * k1), t + 0.5 * dt)
            k3 = self._control_rate(*(theta + 0.5 * dt * k2), t + 0.5 * dt)
            k4 = self._control_rate(*(theta + dt * k3), t + dt)
            theta = theta + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        else:
            theta = theta + dt * np.asarray(state.u_held)
        step = state.step + 1
        t_next = step * dt
        _guard(theta, t_next, "theta_hat")
        return ClosedLoopState(step=step, t=t_next, theta_hat=(float(theta[0]), float(theta[1])),
                               g_hat=state.g_hat, monitors=state.monitors, u_held=state.u_held,
                               overshoot=state.overshoot)

    def _integrate_average(self, state: ClosedLoopState) -> ClosedLoopState:
        # dG/dt_bar = (1/omega) H K held
        dt_bar = self.step_size
        g = np.asarray(state.g_hat)
        rate_matrix = self._hk / self.omega
        if self.config.continuous_control:
            if self.config.integrator is Integrator.RK4:
                k1 = rate_matrix @ g
                k2 = rate_matrix @ (g + 0.5 * dt_bar * k1)
                k3 = rate_matrix @ (g + 0.5 * dt_bar * k2)
                k4 = rate_matrix @ (g + dt_bar * k3)
                g = g + dt_bar / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
            else:
                g = g + dt_bar * (rate_matrix @ g)
        else:
            held = np.array([m.held_gradient for m in state.monitors])
            # exact under zero-order hold: the rate is constant over the step
            g = g + dt_bar * (rate_matrix @ held)
        step = state.step + 1
        t_next = step * dt_bar
        _guard(g, t_next, "average gradient")
        theta = self._theta_star + self._h_inv @ g
        return ClosedLoopState(step=step, t=t_next, theta_hat=(float(theta[0]), float(theta[1])),
                               g_hat=(float(g[0]), float(g[1])), monitors=state.monitors,
                               u_held=state.u_held, overshoot=state.overshoot)

    def integrate(self, state: ClosedLoopState) -> ClosedLoopState:
        if self.mode is Mode.AVERAGE:
            return self._integrate_average(state)
        return self._integrate_full(state)

    def step_full(self, state: ClosedLoopState) -> ClosedLoopState:
        """Advance the full (or periodic) loop by one grid step.

        Raises:
            InvalidParameters: If the simulator is in average mode
            NumericOverflow: If the state diverges
        """
        if self.mode is Mode.AVERAGE:
            raise InvalidParameters("step_full is not available in average mode")
        self.sense(state)
        return self._integrate_full(state)

    def step_average(self, state: ClosedLoopState) -> ClosedLoopState:
        """Advance the average system by one scaled step dt_bar = omega dt.

        Raises:
            InvalidParameters: If the simulator is not in average mode
            NumericOverflow: If the state diverges
        """
        if self.mode is not Mode.AVERAGE:
            raise InvalidParameters("step_average needs average mode")
        self.sense(state)
        return self._integrate_average(state)

    def run(self) -> Trajectory:
        """Integrate from t = 0 to t_final and record every ``record_stride``-th grid point.

        Raises:
            NumericOverflow: With the failing time attached, if the run diverges
        """
        n_steps = self.config.n_steps
        stride = self.config.record_stride
        data = np.empty((n_steps // stride + 1, len(COLUMNS)))
        logger.debug("Running %s in %s mode: %d steps of dt=%g",
                    self.config.name, self.mode.value, n_steps, self.config.dt)

        state = self.initial_state()
        row = 0
        for n in range(n_steps + 1):
            sample = self.sense(state)
            if n % stride == 0:
                data[row] = sample
                row += 1
            if n < n_steps:
                state = self.integrate(state)

        m1, m2 = state.monitors
        event_logs: Tuple[List[float], List[float]] = (list(m1.event_times), list(m2.event_times))
        logger.debug("Finished %s: events=(%d, %d)", self.config.name, len(event_logs[0]), len(event_logs[1]))
        return Trajectory(samples=pd.DataFrame(data[:row], columns=COLUMNS), event_logs=event_logs,
                          config=self.config, time_scale=self.time_scale,
                          detection_slack=(state.overshoot[0], state.overshoot[1]))


def run(config: ScenarioConfig) -> Trajectory:
    return ClosedLoopSimulator(config).run()


def periodic_baseline(config: ScenarioConfig, h: float) -> Trajectory:
    """Same loop with both players updating every h seconds instead of on events.

    Raises:
        InvalidParameters: If h < dt
    """
    if not h >= config.dt:
        raise InvalidParameters(f"Periodic step h must be at least dt={config.dt}, got {h}")
    return ClosedLoopSimulator(config.replace(mode=Mode.PERIODIC, baseline_h=h)).run()
