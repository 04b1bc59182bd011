import math
from dataclasses import dataclass
from typing import Sequence, Tuple, Union

import numpy as np

from ..errors import InvalidMarket, InvalidParameters, SingularHessian

# Relative determinant threshold for inverting the 2x2 pseudo-Hessian
SINGULAR_TOLERANCE = 1e-12


@dataclass(frozen=True)
class ActionPair:
    """Joint action (theta_1, theta_2) of the two players."""

    theta1: float
    theta2: float

    def __post_init__(self):
        if not (math.isfinite(self.theta1) and math.isfinite(self.theta2)):
            raise InvalidParameters(f"Action pair must be finite, got ({self.theta1}, {self.theta2})")

    def as_array(self) -> np.ndarray:
        return np.array([self.theta1, self.theta2], dtype=float)

    def __iter__(self):
        yield self.theta1
        yield self.theta2


ActionLike = Union[ActionPair, Sequence[float], np.ndarray]


def _as_floats(theta: ActionLike) -> Tuple[float, float]:
    theta1, theta2 = theta
    return float(theta1), float(theta2)


@dataclass(frozen=True)
class PlayerPayoff:
    """Quadratic payoff coefficients of one player, written from that player's viewpoint.

    J = 1/2 own_quad * own^2 + 1/2 other_quad * other^2 + cross * own * other
        + lin_own * own + lin_other * other + offset
    """

    own_quad: float
    other_quad: float
    cross: float
    lin_own: float
    lin_other: float
    offset: float

    @property
    def is_concave(self) -> bool:
        return self.own_quad < 0

    def value(self, own: float, other: float) -> float:
        return (0.5 * self.own_quad * own * own
                + 0.5 * self.other_quad * other * other
                + self.cross * own * other
                + self.lin_own * own
                + self.lin_other * other
                + self.offset)

    def own_gradient(self, own: float, other: float) -> float:
        return self.own_quad * own + self.cross * other + self.lin_own

    def other_gradient(self, own: float, other: float) -> float:
        return self.other_quad * other + self.cross * own + self.lin_other

    def to_dict(self) -> dict:
        return {
            "own_quad": self.own_quad,
            "other_quad": self.other_quad,
            "cross": self.cross,
            "lin_own": self.lin_own,
            "lin_other": self.lin_other,
            "offset": self.offset,
        }


@dataclass(frozen=True)
class QuadraticGame:
    """Two-player quadratic game. Player 1 owns theta1, player 2 owns theta2."""

    p1: PlayerPayoff
    p2: PlayerPayoff

    @property
    def pseudo_hessian(self) -> np.ndarray:
        return np.array([
            [self.p1.own_quad, self.p1.cross],
            [self.p2.cross, self.p2.own_quad],
        ], dtype=float)

    @property
    def offset_vec(self) -> np.ndarray:
        return np.array([self.p1.lin_own, self.p2.lin_own], dtype=float)

    def player(self, i: int) -> PlayerPayoff:
        if i == 1:
            return self.p1
        if i == 2:
            return self.p2
        raise InvalidParameters(f"Player index must be 1 or 2, got {i}")

    def payoff(self, theta: ActionLike) -> Tuple[float, float]:
        """Evaluate (J_1, J_2) at a joint action."""
        theta1, theta2 = _as_floats(theta)
        return self.payoff_values(theta1, theta2)

    def payoff_values(self, theta1: float, theta2: float) -> Tuple[float, float]:
        return self.p1.value(theta1, theta2), self.p2.value(theta2, theta1)

    def pseudo_gradient(self, theta: ActionLike) -> np.ndarray:
        """Own-action gradients (dJ_1/dtheta_1, dJ_2/dtheta_2) = H theta + h."""
        theta1, theta2 = _as_floats(theta)
        return np.array([
            self.p1.own_gradient(theta1, theta2),
            self.p2.own_gradient(theta2, theta1),
        ])

    def is_singular(self) -> bool:
        H = self.pseudo_hessian
        scale = float(np.max(np.abs(H)))
        if scale == 0.0:
            return True
        return abs(float(np.linalg.det(H))) <= SINGULAR_TOLERANCE * scale * scale

    def nash_equilibrium(self) -> ActionPair:
        """Closed-form equilibrium theta* = -H^-1 h.

        Raises:
            SingularHessian: If H is singular within the relative tolerance
        """
        if self.is_singular():
            raise SingularHessian("Pseudo-Hessian is singular; no unique Nash equilibrium")
        theta_star = -np.linalg.solve(self.pseudo_hessian, self.offset_vec)
        return ActionPair(float(theta_star[0]), float(theta_star[1]))

    def validate(self) -> None:
        """Check strict concavity and a unique equilibrium.

        Raises:
            InvalidParameters: If a player's own quadratic coefficient is not negative
            SingularHessian: If the pseudo-Hessian is singular
        """
        for i, player in ((1, self.p1), (2, self.p2)):
            if not player.is_concave:
                raise InvalidParameters(f"Player {i} payoff is not strictly concave (own_quad={player.own_quad})")
        if self.is_singular():
            raise SingularHessian("Pseudo-Hessian is singular; no unique Nash equilibrium")

    def to_dict(self) -> dict:
        return {"p1": self.p1.to_dict(), "p2": self.p2.to_dict()}


def duopoly_from_market(S_d: float, p: float, m1: float, m2: float) -> QuadraticGame:
    """Build the price-competition duopoly J_i = (u_i - m_i) s_i.

    Demand split: s_1 = S_d/2 + (u_2 - u_1)/(2p), s_2 = S_d - s_1.

    Args:
        S_d: Total demand
        p: Price sensitivity (must be positive)
        m1: Marginal cost of player 1
        m2: Marginal cost of player 2

    Returns:
        QuadraticGame with H^i_ii = -1/p and cross terms 1/(2p)

    Raises:
        InvalidMarket: If p is not positive
    """
    if not p > 0:
        raise InvalidMarket(f"Price sensitivity p must be positive, got {p}")

    def _player(m: float) -> PlayerPayoff:
        return PlayerPayoff(
            own_quad=-1.0 / p,
            other_quad=0.0,
            cross=1.0 / (2.0 * p),
            lin_own=S_d / 2.0 + m / (2.0 * p),
            lin_other=-m / (2.0 * p),
            offset=-m * S_d / 2.0,
        )

    return QuadraticGame(p1=_player(m1), p2=_player(m2))


def hurwitz_check(M: np.ndarray) -> bool:
    """True iff both eigenvalues of a 2x2 matrix have negative real part."""
    M = np.asarray(M, dtype=float)
    return bool(np.trace(M) < 0 and np.linalg.det(M) > 0)
