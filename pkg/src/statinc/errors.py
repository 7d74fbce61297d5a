"""Exception hierarchy for statinc.

Every failure mode that callers are expected to branch on gets its own
class so the CLI can map library errors onto exit codes without string
matching.
"""


class StatincError(Exception):
    """Base class for all statinc errors."""


class ConfigError(StatincError):
    """Malformed or inconsistent user input (bad shapes, bad parameters)."""


class NonIntegrableDensityError(StatincError):
    """The weighted inverse density fails the integrability requirement."""


class QuadratureConvergenceError(StatincError):
    """Panel refinement did not stabilise an integral to tolerance."""


class InsufficientFourierRangeError(StatincError):
    """A Fourier coefficient table is too short for the requested operator."""


class SingularOperatorError(StatincError):
    """An operator matrix is numerically singular beyond the condition bound."""


class ResidualFailureError(StatincError):
    """Solved coefficients violate the defining system's residual bound."""


class SupportLeakageError(StatincError):
    """Recovered time-domain weights leak into the forbidden index band."""


class PositivityViolationError(StatincError):
    """A candidate spectral density or weighted inverse goes negative."""


class FactorizationError(StatincError):
    """Spectral factorization of a nonnegative trigonometric polynomial failed."""


class NoConvergenceError(StatincError):
    """An iterative procedure exhausted its budget without converging."""
