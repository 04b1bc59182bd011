import logging
import math
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np
from scipy import linalg

from ..errors import InvalidParameters, NotHurwitz
from ..game.quadratic_game import hurwitz_check
from ..sim.scenario import ScenarioConfig
from ..trigger.event_trigger import min_inter_event_time

logger = logging.getLogger(__name__)

LYAPUNOV_RESIDUAL_TOLERANCE = 1e-10


def _check_spd(Q: np.ndarray) -> np.ndarray:
    Q = np.asarray(Q, dtype=float)
    if Q.shape != (2, 2) or not np.allclose(Q, Q.T):
        raise InvalidParameters(f"Q must be a symmetric 2x2 matrix, got {Q.tolist()}")
    if np.min(np.linalg.eigvalsh(Q)) <= 0:
        raise InvalidParameters("Q must be positive definite")
    return Q


def solve_lyapunov(H: np.ndarray, K: np.ndarray, Q: Optional[np.ndarray] = None) -> np.ndarray:
    """Solve K^T H^T P + P H K = -Q for the symmetric 2x2 matrix P.

    With A = HK = [[a, b], [c, d]] and P = [[p11, p12], [p12, p22]] the equation
    reduces to three linear equations in (p11, p12, p22).

    Args:
        H: Pseudo-Hessian
        K: Diagonal gain matrix
        Q: Symmetric positive-definite right-hand side (identity if omitted)

    Returns:
        The unique symmetric solution P

    Raises:
        NotHurwitz: If HK is not Hurwitz
        InvalidParameters: If Q is not symmetric positive definite
    """
    A = np.asarray(H, dtype=float) @ np.asarray(K, dtype=float)
    Q = np.eye(2) if Q is None else _check_spd(Q)
    if not hurwitz_check(A):
        raise NotHurwitz(f"HK is not Hurwitz: {A.tolist()}")

    (a, b), (c, d) = A
    system = np.array([
        [2.0 * a, 2.0 * c, 0.0],
        [b, a + d, c],
        [0.0, 2.0 * b, 2.0 * d],
    ])
    rhs = -np.array([Q[0, 0], Q[0, 1], Q[1, 1]])
    p11, p12, p22 = linalg.solve(system, rhs)
    P = np.array([[p11, p12], [p12, p22]])

    residual = lyapunov_residual(A, P, Q)
    if residual > LYAPUNOV_RESIDUAL_TOLERANCE * np.linalg.norm(Q, 2):
        logger.warning("Lyapunov residual %.3e above tolerance", residual)
    return P


def lyapunov_residual(A: np.ndarray, P: np.ndarray, Q: np.ndarray) -> float:
    return float(np.linalg.norm(A.T @ P + P @ A + Q, 2))


def sigma_bar_max(P: np.ndarray, Q: np.ndarray, H: np.ndarray, K: np.ndarray) -> float:
    """Largest admissible sigma_bar: lambda_min(Q) / (2 ||P H K||)."""
    phk = np.asarray(P) @ np.asarray(H) @ np.asarray(K)
    return float(np.min(np.linalg.eigvalsh(Q)) / (2.0 * np.linalg.norm(phk, 2)))


@dataclass(frozen=True)
class StabilityReport:
    P: np.ndarray
    Q: np.ndarray
    alpha: float
    sigma_bar: float
    sigma_bar_max: float
    sigma_hat: float
    m_theta: float
    tau_star: float
    hk_norm: float
    omega: float
    lyapunov_residual: float

    @property
    def within_bound(self) -> bool:
        return self.sigma_bar < self.sigma_bar_max

    @property
    def residual_ok(self) -> bool:
        """Whether ||A^T P + P A + Q|| stays within LYAPUNOV_RESIDUAL_TOLERANCE ||Q||."""
        return self.lyapunov_residual <= LYAPUNOV_RESIDUAL_TOLERANCE * float(np.linalg.norm(self.Q, 2))

    @property
    def decay_rate(self) -> float:
        """alpha (1 - sigma_hat), the exponential rate of V_av in seconds."""
        return self.alpha * (1.0 - self.sigma_hat)

    def to_dict(self) -> dict:
        return {
            "P": self.P.tolist(),
            "Q": self.Q.tolist(),
            "alpha": self.alpha,
            "sigma_bar": self.sigma_bar,
            "sigma_bar_max": self.sigma_bar_max,
            "sigma_hat": self.sigma_hat,
            "within_bound": self.within_bound,
            "m_theta": self.m_theta,
            "tau_star": self.tau_star,
            "hk_norm": self.hk_norm,
            "omega": self.omega,
            "lyapunov_residual": self.lyapunov_residual,
            "residual_ok": self.residual_ok,
        }


def build_report(config: ScenarioConfig, Q: Optional[np.ndarray] = None) -> StabilityReport:
    """Assemble the stability quantities of the average closed loop for a scenario.

    Raises:
        NotHurwitz: If HK is not Hurwitz
    """
    H = config.game.pseudo_hessian
    K = config.gain_matrix
    Q = np.eye(2) if Q is None else _check_spd(Q)
    P = solve_lyapunov(H, K, Q)

    p_eig = np.linalg.eigvalsh(P)
    q_min = float(np.min(np.linalg.eigvalsh(Q)))
    hk_norm = float(np.linalg.norm(H @ K, 2))
    bound = sigma_bar_max(P, Q, H, K)
    sigma_bar = config.policy.sigma_bar

    report = StabilityReport(
        P=P,
        Q=Q,
        alpha=q_min / float(p_eig[-1]),
        sigma_bar=sigma_bar,
        sigma_bar_max=bound,
        sigma_hat=sigma_bar / bound,
        m_theta=math.sqrt(p_eig[-1] / p_eig[0]) * np.linalg.norm(np.linalg.inv(H), 2) * np.linalg.norm(H, 2),
        tau_star=min_inter_event_time(sigma_bar, hk_norm),
        hk_norm=hk_norm,
        omega=config.dither.base_frequency,
        lyapunov_residual=lyapunov_residual(H @ K, P, Q),
    )
    if not report.residual_ok:
        logger.warning("Lyapunov residual %.3e above tolerance; P is not trustworthy", report.lyapunov_residual)
    if not report.within_bound:
        logger.warning("sigma_bar=%.4f is not below sigma_bar_max=%.4f", sigma_bar, bound)
    return report


def fit_sigma_to_bound(config: ScenarioConfig, Q: Optional[np.ndarray] = None,
                       shrink: float = 0.9) -> Tuple[ScenarioConfig, float]:
    """Scale the trigger thresholds uniformly until sigma_bar < sigma_bar_max.

    Returns:
        The adjusted config and the factor applied to sigma (1.0 if unchanged)
    """
    if not 0.0 < shrink < 1.0:
        raise InvalidParameters(f"shrink must lie in (0, 1), got {shrink}")
    H = config.game.pseudo_hessian
    K = config.gain_matrix
    Q = np.eye(2) if Q is None else _check_spd(Q)
    bound = sigma_bar_max(solve_lyapunov(H, K, Q), Q, H, K)

    factor = 1.0
    while config.policy.sigma_bar * factor >= bound:
        factor *= shrink
    if factor < 1.0:
        logger.info("Scaled sigma by %.4f to satisfy sigma_bar < %.4f", factor, bound)
        config = config.replace(policy=config.policy.scaled(factor))
    return config, factor
