"""Exception types shared across the package."""


class DomainError(ValueError):
    """Argument outside the mathematical domain of a function."""


class InfeasibleError(ValueError):
    """Parameters violate a stability or positivity constraint.

    Raised for vortex numbers outside the admissible range, area below the
    Bradlow bound, or a volume polynomial that evaluates non-positive.
    """


class ConvergenceError(RuntimeError):
    """A nonlinear solve failed to reach its tolerance.

    The partial Newton report is attached as ``report`` when available.
    """

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report


class SingularSystemError(RuntimeError):
    """The linearised system could not be factorised."""
