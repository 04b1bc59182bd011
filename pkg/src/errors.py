from typing import Optional


class NesError(Exception):
    """Base class for all errors raised by the simulation package."""


class SingularHessian(NesError, ValueError):
    """The pseudo-Hessian is not invertible, so no unique Nash equilibrium exists."""


class InvalidMarket(NesError, ValueError):
    """Market parameters cannot be mapped to a concave duopoly game."""


class InvalidParameters(NesError, ValueError):
    """A numeric argument is outside its admissible range."""


class NonMonotoneTime(NesError, ValueError):
    """An event was reported at or before the previous event time."""


class EmptyLog(NesError, ValueError):
    """Statistics were requested for an empty event log."""


class NotHurwitz(NesError, ValueError):
    """KH has an eigenvalue with non-negative real part."""


class NotConverged(NesError, RuntimeError):
    """A trajectory did not settle enough for a decay fit."""


class NumericOverflow(NesError, ArithmeticError):
    """The closed loop left the admissible state magnitude.

    Attributes:
        t: Simulation time of the failing step (scaled time for average runs)
    """

    def __init__(self, message: str, t: Optional[float] = None):
        super().__init__(message)
        self.t = t


class ParseError(NesError, ValueError):
    """A scenario file is not well-formed JSON."""


class ValidationError(NesError, ValueError):
    """A scenario field violates an invariant.

    Attributes:
        field: Dotted name of the offending field (e.g. "trigger.sigma")
    """

    def __init__(self, field: str, message: str):
        super().__init__(f"{field}: {message}")
        self.field = field
