"""Exception hierarchy shared by all qwork modules.

Every error that the command line maps to a dedicated exit code has its
own class here; library code raises these instead of bare ValueError so
callers can tell configuration mistakes from numerical breakdowns.
"""


class QworkError(Exception):
    """Base class for all qwork-specific errors."""


class DimensionError(QworkError, ValueError):
    """State vector length does not match the lattice Hilbert space."""


class ConfigError(QworkError):
    """Invalid or incomplete run configuration (exit code 2)."""


class MissingInputError(QworkError):
    """A required input file is absent (exit code 3)."""


class CapacityError(QworkError):
    """Requested problem size exceeds the memory budget (exit code 4)."""

    def __init__(self, message, required_bytes=None, budget_bytes=None):
        super().__init__(message)
        self.required_bytes = required_bytes
        self.budget_bytes = budget_bytes


class NumericalError(QworkError):
    """Numerical failure: overflow, underflow or loss of significance (exit code 5)."""


class ResolutionError(NumericalError):
    """Requested expansion or grid cannot resolve the target function."""


class AliasingError(NumericalError):
    """Spectral weight at the frequency window edge: time step too coarse."""


class FitError(NumericalError):
    """A least-squares fit is unreliable (too few points, clamped data)."""
