"""Exception hierarchy for ricci-lab.

Every error raised by the library derives from ``RicciLabError`` so callers can
catch the whole family at once. Conditions that are part of a normal answer
(violated hypotheses, vacuous bounds, clamped balls) are reported as flags on
result objects instead of being raised.
"""

from typing import Any, Optional


class RicciLabError(Exception):
    """Base class for all ricci-lab errors."""


class InvalidParameterError(RicciLabError, ValueError):
    """Raised when a scalar parameter is outside its admissible range."""


class InvalidProfileError(RicciLabError, ValueError):
    """Raised when warped-product profiles violate the metric invariants."""


class ResolutionError(RicciLabError):
    """Raised when a grid is too coarse to resolve the poles."""


class PastSingularityError(RicciLabError):
    """Raised when an exact solution is requested at or beyond its maximal time."""

    def __init__(self, t: float, maximal_time: float):
        self.t = t
        self.maximal_time = maximal_time
        super().__init__(f"time {t!r} is not before the maximal time {maximal_time!r}")


class StepRejectedError(RicciLabError):
    """Raised when a time step produces a state that violates the metric invariants."""


class SingularitySignal(RicciLabError):
    """Raised when the warped profile pinches to machine precision during a step."""


class NumericalBlowupError(RicciLabError):
    """Raised when a flow produces non-finite values.

    The trajectory accumulated before the failure is kept on ``partial`` so the
    caller can still export it.
    """

    def __init__(self, message: str, partial: Optional[Any] = None):
        super().__init__(message)
        self.partial = partial


class OutOfRangeError(RicciLabError):
    """Raised when a time interval leaves the span covered by a trajectory."""


class NotApplicableError(RicciLabError):
    """Raised when an operation's structural precondition does not hold."""


class InvalidTestFieldError(RicciLabError, ValueError):
    """Raised when a Sobolev test field does not vanish on the boundary of its ball."""


class ConfigError(RicciLabError):
    """Raised when a configuration file or exported artifact cannot be read."""
