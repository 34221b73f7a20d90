"""Exception hierarchy shared across the package."""


class ViscolimError(Exception):
    """Base class for all package errors."""


class ConfigError(ViscolimError, ValueError):
    """Invalid input parameters or configuration document."""


class NonCompactSupport(ConfigError):
    """Operation needs a compactly supported potential."""


class QuadratureOrderTooLow(ConfigError):
    pass


class ZeroWavenumber(ConfigError):
    pass


class NumericalFailure(ViscolimError):
    """A numerical stage failed; CLI maps these to exit code 3."""


class NoConvergence(NumericalFailure):
    pass


class BudgetExceeded(NumericalFailure):
    pass


class BoundaryTooCloseToZero(NumericalFailure):
    """A zero of the matching function sits on (or too near) a contour."""
