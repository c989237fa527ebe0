"""Exception hierarchy shared by the numerical modules and the CLI.

Each class carries the process exit code the CLI maps it to.
"""


class SPDCError(Exception):
    exit_code = 1


class ConfigError(SPDCError):
    """Malformed crystal file or run configuration."""

    exit_code = 3


class RangeError(SPDCError, ValueError):
    """Evaluation outside a dispersion model's validity interval."""

    exit_code = 4


class ConvergenceError(SPDCError, ArithmeticError):
    """An adaptive quadrature failed to meet its tolerance.

    ``estimates`` holds the last two estimates that disagreed.
    """

    exit_code = 5

    def __init__(self, message, estimates=(), failures=None, partial=None):
        super().__init__(message)
        self.estimates = tuple(estimates)
        self.failures = failures or {}
        self.partial = partial


class ShapeError(SPDCError, ValueError):
    """A spectrum or correlation trace does not have the expected single-peak shape."""

    exit_code = 6

    def __init__(self, message, crossings=None):
        super().__init__(message)
        self.crossings = crossings


class RootNotFoundError(SPDCError, ArithmeticError):
    exit_code = 7


class NoQPMSolutionError(SPDCError, ValueError):
    """The degenerate mismatch would require a negative (backward) poling period."""

    exit_code = 7


class WindowingError(SPDCError, ValueError):
    """The spectral window truncates a non-negligible amplitude."""

    exit_code = 8
