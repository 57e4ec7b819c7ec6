"""Exception hierarchy shared by every module in the package."""


class RepeatedGameError(Exception):
    """Base class for all domain errors raised by this package."""


class ConstraintViolation(RepeatedGameError):
    """A stage-game payoff constraint does not hold.

    Carries the name of the failed inequality in ``inequality``.
    """

    def __init__(self, inequality: str, message: str = ""):
        self.inequality = inequality
        super().__init__(message or f"constraint violated: {inequality}")


class OutOfRange(RepeatedGameError):
    """A probability or count lies outside its admissible range."""


class NotCompletelyMixed(RepeatedGameError):
    """A strategy has an action probability of exactly 0 or 1 where a
    strictly interior value is required."""


class RepeatStrategyForbidden(RepeatedGameError):
    """The strategy (1,1,0,0) repeats its own last action and induces an
    absorbing outcome chain; it is rejected wherever payoffs are computed."""


class SingularChain(RepeatedGameError):
    """The outcome chain has no unique stationary distribution."""


class NearSingular(RepeatedGameError):
    """The determinant denominator is numerically zero."""


class MemoryMismatch(RepeatedGameError):
    """An opponent's memory length disagrees with the requested one."""


class MemoryLimitExceeded(RepeatedGameError):
    """The requested state space is larger than this desk-scale tool allows."""


class NotCommunicating(RepeatedGameError):
    """The decision process is not communicating; the average-reward solver
    requires a strongly connected union transition graph."""


class NoConvergence(RepeatedGameError):
    """Value iteration did not meet its span criterion within the cap."""

    def __init__(self, iterations: int, span: float):
        self.iterations = iterations
        self.span = span
        super().__init__(f"no convergence after {iterations} iterations (span {span:.3e})")


class InfeasibleHypothesis(RepeatedGameError):
    """Rejection sampling could not produce a hypothesis-satisfying instance."""


class SegmentHitsRepeat(RepeatedGameError):
    """A coordinate sweep would pass through the Repeat strategy (1,1,0,0)."""
