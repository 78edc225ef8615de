"""Exception hierarchy shared across the package."""

from __future__ import annotations


class GksRomError(Exception):
    """Base class for errors raised by this package."""


class ValidationError(GksRomError):
    """Invalid input: bad configuration values, shapes, or call preconditions."""


class ClockMismatchError(ValidationError):
    """Two trajectories were recorded on different clocks and cannot be compared."""


class IntegrationFailureError(GksRomError):
    """Time integration produced a non-finite state.

    ``time`` is the recording instant at which the failure was detected; the
    blow-up happened at or shortly before it.  ``rows`` identifies the failing
    trajectories when several were integrated together.
    """

    def __init__(self, message: str, time: float | None = None,
                 rows: list[int] | None = None):
        super().__init__(message)
        self.time = time
        self.rows = rows


class NumericalError(GksRomError):
    """A numerical routine produced an invalid or inconsistent result."""


class FormatError(GksRomError):
    """Malformed, truncated, or inconsistent artifact file."""
