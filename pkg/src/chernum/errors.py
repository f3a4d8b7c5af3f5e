"""Exception types shared across the package.

The CLI maps these onto process exit codes: InputError -> 2,
TrackingError / NumericalError -> 3, AssumptionViolationError -> 4.
"""


class ChernumError(Exception):
    """Base class for all package errors."""


class InputError(ChernumError):
    """Malformed or inconsistent user input (parsing, shapes, degree floors)."""


class TrackingError(ChernumError):
    """A continuation run left paths unresolved after all retries."""

    def __init__(self, message, failed_paths=None):
        super().__init__(message)
        self.failed_paths = list(failed_paths) if failed_paths else []


class NumericalError(ChernumError):
    """A numerical guarantee was violated (non-unimodular matrix, bad solve)."""


class AssumptionViolationError(ChernumError):
    """The residual scheme is not finite: junk or unresolved clusters found.

    Carries the offending cluster representatives for diagnostics.
    """

    def __init__(self, message, clusters=None):
        super().__init__(message)
        self.clusters = list(clusters) if clusters else []
