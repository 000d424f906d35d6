"""Exception types shared across the toolkit.

Every failure mode that callers are expected to handle gets its own class so
that the CLI can map computation problems to exit codes without string
matching.  All of them derive from :class:`OscillapError`.
"""

from __future__ import annotations


class OscillapError(Exception):
    """Base class for all toolkit errors."""


class DomainError(OscillapError, ValueError):
    """An argument lies outside the mathematical domain of the operation."""


class NoZerosFound(OscillapError):
    """Fewer zeros of f were located than requested within the search horizon."""


class QuadratureFailure(OscillapError):
    """Adaptive quadrature exceeded its subdivision budget without converging."""


class InfeasibleDelta(OscillapError):
    """No boundary-layer width delta in (0, R) keeps the constant C1 positive."""


class NonpositiveFbar(OscillapError):
    """A formula required Fbar(s) > 0 but the computed value is <= 0."""


class StalledAtCriticalPoint(OscillapError):
    """f vanishes at the initial height c, so the radial trajectory is constant."""

    def __init__(self, c: float, fc: float):
        super().__init__(
            f"f({c!r}) = {fc!r} is numerically zero; the trajectory never leaves c"
        )
        self.c = c
        self.fc = fc


class NonintegrableStep(OscillapError):
    """The adaptive integrator underflowed its step size near a degenerate point."""


class NotAZeroHit(OscillapError):
    """A rescaling or diagnostic was requested for a trajectory with no first zero."""


class EmptyGrid(OscillapError):
    """A scan was requested over an empty parameter grid."""


class NonConvergence(OscillapError):
    """Iteration budget exhausted before reaching stationarity.

    Carries the best iterate found so the caller can inspect or resume it.
    """

    def __init__(self, message: str, best=None, residual: float = float("nan")):
        super().__init__(message)
        self.best = best
        self.residual = residual
