"""Exception types shared across the package."""


class TranscendError(Exception):
    """Base class for all package errors."""


class RangeExhausted(TranscendError, OverflowError):
    """A log-modulus left the finite double range."""


class ZeroToLogOnlyPower(TranscendError, ValueError):
    pass


class LogOnlyError(TranscendError, ValueError):
    """An operation needed the exact value of a count only known by its log."""


class IndeterminateSign(TranscendError, ArithmeticError):
    pass


class NotFound(TranscendError):
    pass


class ConvergenceFailure(TranscendError):
    pass


class ValidationFailure(TranscendError, ValueError):
    """Parameters violate one or more construction constraints.

    ``violations`` holds one human-readable message per failed constraint.
    """

    def __init__(self, violations):
        self.violations = list(violations)
        super().__init__("; ".join(self.violations))


class DepthCapped(TranscendError):
    pass


class OutOfRange(TranscendError, ValueError):
    pass


class TolUnreachable(TranscendError, ValueError):
    pass


class BracketFailure(TranscendError):
    pass


class SkippedLogOnly(TranscendError):
    pass


class InfeasibleDegree(TranscendError):
    pass


class DegenerateFit(TranscendError, ValueError):
    pass


class EmptySet(TranscendError, ValueError):
    pass
