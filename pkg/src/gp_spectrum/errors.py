"""Exception types raised by the spectrum library."""


class SpectrumError(Exception):
    """Base class for every error raised by this package."""


class DomainError(SpectrumError, ValueError):
    """Input outside the admissible parameter or argument domain."""


class PoleProximity(DomainError):
    """Evaluation point too close to a pole ``-k**beta`` of K."""


class SectorViolation(DomainError):
    """Point (or requested sector) too close to the negative real axis."""


class RegionViolation(DomainError):
    """Fixed-point argument outside the disc ``|tau| < 1/2``."""


class ToleranceUnreachable(SpectrumError):
    """Adaptive truncation could not certify the tolerance within the term budget.

    ``best_bound`` is the smallest truncation bound reached before giving up.
    """

    def __init__(self, message, best_bound=float("inf")):
        super().__init__(message)
        self.best_bound = best_bound


class QuadratureFailure(SpectrumError):
    """Adaptive quadrature did not reach the requested accuracy."""


class EscapedRegion(SpectrumError):
    """A fixed-point iterate left ``|tau| < 1/2``."""


class NoConvergence(SpectrumError):
    """No root was found by any of the available strategies."""


class BoundaryTooClose(SpectrumError):
    """``|D_n|`` fell below the safety threshold on a rectangle boundary."""


class NonIntegerWinding(SpectrumError):
    """Accumulated phase did not land near an integer multiple of 2*pi."""


class LostZero(SpectrumError):
    """Bisection could not find which half of a rectangle holds the zero."""


class InsufficientData(SpectrumError):
    """Too few points (or too narrow an n-range) for a remainder fit."""
