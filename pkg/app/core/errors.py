# File: app/core/errors.py

"""
Error taxonomy shared by every service.

All numerical failures derive from OpolyError so the CLI and the HTTP layer
can map them to exit codes and status codes in one place.
"""


class OpolyError(Exception):
    """Base class for every failure raised by the opoly services."""


class NonConvergence(OpolyError):
    """A refinement loop (quadrature halving, grid doubling) ran out of levels."""


class GridTooCoarse(NonConvergence):
    """Two successive log-t grids disagree beyond the allowed gap."""


class DomainError(OpolyError, ValueError):
    """Inputs outside the mathematical domain of an operation, or a non-finite sample."""


class PrecisionExhausted(OpolyError):
    """Doubling the working precision did not stabilise a result."""


class RecurrenceViolation(OpolyError):
    """A moment table failed its own three-term self-check."""


class NotPositiveDefinite(OpolyError):
    """A moment Hankel matrix produced a non-positive pivot."""


class DegenerateDenominator(OpolyError):
    """A denominator that is provably nonzero vanished at working tolerance."""


class EigenFailure(OpolyError):
    """Sturm counts of a Jacobi matrix were inconsistent."""


# Exit status per error class for the command line.
EXIT_OK = 0
EXIT_IDENTITY_FAILURE = 1
EXIT_USAGE = 2
EXIT_NUMERICAL = 3


def exit_code_for(exc: BaseException) -> int:
    if isinstance(exc, DomainError):
        return EXIT_USAGE
    return EXIT_NUMERICAL
