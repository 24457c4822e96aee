"""Exception hierarchy shared by all fidres modules."""


class FidresError(Exception):
    """Base class for every error raised by this package."""


class DomainError(FidresError, ValueError):
    """An argument lies outside the domain of the operation."""


class InconsistentDataError(DomainError):
    """Observed data admit no parameter value (empty fiducial support)."""


class NumericError(FidresError, ArithmeticError):
    """A numerical procedure failed to converge."""


class UndefinedActionError(FidresError, ArithmeticError):
    """The optimal action does not exist (e.g. an infinite moment)."""


class EvaluationError(FidresError, RuntimeError):
    """Too many Monte Carlo replications failed to evaluate."""


class PreconditionError(FidresError, ValueError):
    """An equivariance or invariance precheck failed.

    The offending triple is stored on ``violation``.
    """

    def __init__(self, message, violation=None):
        super().__init__(message)
        self.violation = violation


class UnsupportedModelError(FidresError, ValueError):
    """The requested model does not provide the needed operation."""
