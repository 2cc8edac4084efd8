"""Exception and warning types shared across the library."""


class TacfermiError(Exception):
    """Base class for all library errors."""


class DomainError(TacfermiError, ValueError):
    """An argument lies outside the supported parameter range."""


class BudgetExceededError(TacfermiError):
    """A quadrature refused to converge within the node budget."""


class NonConvergenceError(TacfermiError):
    """Successive refinements failed to agree to the requested tolerance."""


class PrecisionInsufficientError(TacfermiError):
    """A residual check detected loss of significance; raise the bit count."""


class SingularOperatorError(TacfermiError):
    """A discretized (1 - K) solve failed its residual check."""


class WindowTooSmallError(TacfermiError):
    """Wave-function or correlator mass leaks outside the requested window."""


class TruncationWarning(UserWarning):
    """A truncated tail estimate exceeded the requested tolerance."""


class WindowClippedWarning(UserWarning):
    """Correlator mass near the window boundary is not negligible."""
