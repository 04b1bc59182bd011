"""Trigonometric expansion of the demodulated gradient estimate.

Around the equilibrium theta*, player i's estimate reads

    G_i(t) = Hcal_i1(t) th_1 + Hcal_i2(t) th_2 + r_i(t) q_i(th) + delta_i(t)

with th = theta_hat - theta*, q_i the quadratic form of player i's payoff in th,
r_i(t) = sin(w_i t) / a_i, and Hcal(t), delta(t) sums of sinusoids obtained with
product-to-sum identities. The one-period mean of Hcal(t) is the pseudo-Hessian.
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate

from ..dither.dither_plan import DitherPlan
from ..game.quadratic_game import ActionLike, PlayerPayoff, QuadraticGame
from ..sim.closed_loop import measure

# Samples per common period for period averages
PERIOD_SAMPLES = 4096


@dataclass(frozen=True)
class ExpansionTerms:
    hessian: np.ndarray
    ripple: np.ndarray
    delta: np.ndarray


def _player_terms(payoff: PlayerPayoff, t_own: float, t_other: float, j_star: float,
                  a_i: float, a_j: float, w_i: float, w_j: float, t: float):
    g_own = payoff.own_gradient(t_own, t_other)
    g_other = payoff.other_gradient(t_own, t_other)
    h_ii, h_jj, h_ij = payoff.own_quad, payoff.other_quad, payoff.cross

    s_i = math.sin(w_i * t)
    s_j = math.sin(w_j * t)
    double_i = 1.0 - math.cos(2.0 * w_i * t)
    beat = math.cos((w_i - w_j) * t) - math.cos((w_i + w_j) * t)

    h_own = (2.0 * g_own / a_i) * s_i + h_ii * double_i + (h_ij * a_j / a_i) * beat
    h_other = (2.0 * g_other / a_i) * s_i + h_ij * double_i + (h_jj * a_j / a_i) * beat

    delta = (
        (2.0 * j_star / a_i) * s_i
        + g_own * double_i
        + (g_other * a_j / a_i) * beat
        + (h_ii * a_i / 4.0) * (3.0 * s_i - math.sin(3.0 * w_i * t))
        + (h_jj * a_j * a_j / (2.0 * a_i)) * (
            s_i - 0.5 * math.sin((w_i + 2.0 * w_j) * t) - 0.5 * math.sin((w_i - 2.0 * w_j) * t))
        + h_ij * a_j * (
            s_j - 0.5 * math.sin((2.0 * w_i + w_j) * t) + 0.5 * math.sin((2.0 * w_i - w_j) * t))
    )
    return h_own, h_other, s_i / a_i, delta


def expansion_terms(game: QuadraticGame, dither: DitherPlan, t: float) -> ExpansionTerms:
    """Time-varying coefficients of the expansion at time t.

    Raises:
        SingularHessian: If the game has no unique equilibrium
    """
    star = game.nash_equilibrium()
    j1, j2 = game.payoff(star)
    a1, a2 = dither.a
    w1, w2 = dither.omega_values

    h11, h12, r1, d1 = _player_terms(game.p1, star.theta1, star.theta2, j1, a1, a2, w1, w2, t)
    h22, h21, r2, d2 = _player_terms(game.p2, star.theta2, star.theta1, j2, a2, a1, w2, w1, t)
    return ExpansionTerms(
        hessian=np.array([[h11, h12], [h21, h22]]),
        ripple=np.array([r1, r2]),
        delta=np.array([d1, d2]),
    )


def _quadratic_form(payoff: PlayerPayoff, own: float, other: float) -> float:
    return payoff.own_quad * own * own + payoff.other_quad * other * other + 2.0 * payoff.cross * own * other


def expansion_estimate(game: QuadraticGame, dither: DitherPlan, theta_tilde: ActionLike, t: float) -> np.ndarray:
    th1, th2 = (float(x) for x in theta_tilde)
    terms = expansion_terms(game, dither, t)
    quadratic = np.array([
        _quadratic_form(game.p1, th1, th2),
        _quadratic_form(game.p2, th2, th1),
    ])
    return terms.hessian @ np.array([th1, th2]) + terms.ripple * quadratic + terms.delta


def direct_estimate(game: QuadraticGame, dither: DitherPlan, theta_tilde: ActionLike, t: float) -> np.ndarray:
    star = game.nash_equilibrium().as_array()
    theta_hat = star + np.asarray([float(x) for x in theta_tilde])
    return np.array(measure(game, dither, theta_hat, t).g_hat)


def gradient_decomposition_residual(game: QuadraticGame, dither: DitherPlan,
                                    theta_tilde: ActionLike, t: float) -> np.ndarray:
    """Direct demodulated estimate minus its expansion, per player.

    Raises:
        SingularHessian: If the game has no unique equilibrium
    """
    return direct_estimate(game, dither, theta_tilde, t) - expansion_estimate(game, dither, theta_tilde, t)


def average_expansion_hessian(game: QuadraticGame, dither: DitherPlan, samples: int = PERIOD_SAMPLES) -> np.ndarray:
    """Mean of Hcal(t) over one common dither period."""
    T = dither.common_period()
    times = np.linspace(0.0, T, samples + 1)
    values = np.array([expansion_terms(game, dither, t).hessian for t in times])
    return integrate.trapezoid(values, times, axis=0) / T
