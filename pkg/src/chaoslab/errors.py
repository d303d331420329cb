"""Exception hierarchy shared by the modules and the harness."""


class ChaosLabError(Exception):
    """Base class; the harness maps any subclass to exit status 3."""


class DomainError(ChaosLabError, ValueError):
    pass


class ConfigurationError(ChaosLabError, ValueError):
    pass


class ConvergenceError(ChaosLabError, RuntimeError):
    pass


class GeometryError(ChaosLabError, ValueError):
    pass


class GrazingError(ChaosLabError):
    pass


class CornerError(ChaosLabError):
    pass


class LostOrbitError(ChaosLabError):
    pass


class CuspDepthError(ChaosLabError):
    pass


class InsufficientDataError(ChaosLabError, ValueError):
    pass


class TruncationWarning(UserWarning):
    """Green-Kubo series tail is not negligible at the chosen cutoff."""
