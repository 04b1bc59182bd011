import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Tuple, Union

from ..errors import InvalidParameters

RationalLike = Union[Fraction, int, float, str, Tuple[int, int]]


def to_fraction(value: RationalLike) -> Fraction:
    """Convert a number, decimal string or (numerator, denominator) pair to an exact Fraction.

    Floats go through their shortest decimal repr, so 0.2 becomes 1/5 rather than
    the binary expansion.
    """
    if isinstance(value, Fraction):
        return value
    if isinstance(value, (tuple, list)):
        numerator, denominator = value
        return Fraction(int(numerator), int(denominator))
    if isinstance(value, float):
        return Fraction(repr(value))
    return Fraction(value)


@dataclass(frozen=True)
class DitherPlan:
    """Sinusoidal probing plan: amplitudes a_i and exact rational frequencies omega_i (rad/s)."""

    a: Tuple[float, float]
    omega: Tuple[Fraction, Fraction]

    def __post_init__(self):
        a1, a2 = (float(x) for x in self.a)
        if not (a1 > 0 and a2 > 0):
            raise InvalidParameters(f"Dither amplitudes must be positive, got {self.a}")
        w1, w2 = (to_fraction(w) for w in self.omega)
        if not (w1 > 0 and w2 > 0):
            raise InvalidParameters(f"Dither frequencies must be positive, got {self.omega}")
        if w1 == w2:
            raise InvalidParameters(f"Dither frequencies must be distinct, got {w1} and {w2}")
        object.__setattr__(self, "a", (a1, a2))
        object.__setattr__(self, "omega", (w1, w2))

    @property
    def a_norm(self) -> float:
        return math.hypot(self.a[0], self.a[1])

    @property
    def omega_values(self) -> Tuple[float, float]:
        return float(self.omega[0]), float(self.omega[1])

    @staticmethod
    def _index(i: int) -> int:
        if i not in (1, 2):
            raise InvalidParameters(f"Player index must be 1 or 2, got {i}")
        return i - 1

    def probe(self, i: int, t: float) -> float:
        """S_i(t) = a_i sin(omega_i t)."""
        k = self._index(i)
        return self.a[k] * math.sin(float(self.omega[k]) * t)

    def demod(self, i: int, t: float) -> float:
        """M_i(t) = (2 / a_i) sin(omega_i t)."""
        k = self._index(i)
        return (2.0 / self.a[k]) * math.sin(float(self.omega[k]) * t)

    def common_period(self) -> float:
        """T = 2 pi LCM{1/omega_1, 1/omega_2}, evaluated exactly on the rationals."""
        (n1, d1), (n2, d2) = ((w.numerator, w.denominator) for w in self.omega)
        lcm_of_inverses = Fraction(math.lcm(d1, d2), math.gcd(n1, n2))
        return 2.0 * math.pi * float(lcm_of_inverses)

    @property
    def base_frequency(self) -> float:
        return base_frequency(self.common_period())

    def scaled(self, factor: RationalLike) -> "DitherPlan":
        """Plan with both frequencies multiplied by an exact rational factor."""
        f = to_fraction(factor)
        return DitherPlan(a=self.a, omega=(self.omega[0] * f, self.omega[1] * f))

    def to_dict(self) -> dict:
        return {
            "amplitudes": list(self.a),
            "frequencies": [[w.numerator, w.denominator] for w in self.omega],
        }


def base_frequency(T: float) -> float:
    """omega = 2 pi / T for the time scaling t_bar = omega t."""
    if not T > 0:
        raise InvalidParameters(f"Period must be positive, got {T}")
    return 2.0 * math.pi / T
