"""Exception types shared across the package."""


class MrfGridError(Exception):
    """Base class for all package-specific errors."""


class UnsupportedModelError(MrfGridError):
    """An operation was called on a model family it does not support."""


class InfeasibleError(MrfGridError):
    """A requested computation is infeasible (too large, empty grid, ...)."""


class EnumerationTooLargeError(InfeasibleError):
    """The configuration space exceeds the exhaustive-enumeration cap."""


class GridMismatchError(MrfGridError):
    """A precomputed grid does not match the model or data it is used with."""
