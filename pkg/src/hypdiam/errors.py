"""Exception types shared across the package."""


class HypdiamError(Exception):
    """Base class for all package errors."""


class InputRangeError(HypdiamError, ValueError):
    """A parameter is outside the supported numerical range."""


class ClosingError(HypdiamError):
    """Hexagon chain construction failed to close within tolerance."""


class BudgetExceededError(HypdiamError):
    """Node budget exhausted during enumeration.

    The partially completed result, when available, is attached as
    ``partial``.
    """

    def __init__(self, message, partial=None):
        super().__init__(message)
        self.partial = partial


class EstimationError(HypdiamError):
    """Not enough data to form the requested estimate."""


class DisconnectedSurfaceError(HypdiamError):
    """Operation requires a connected surface."""


class UnreachedVerticesError(HypdiamError):
    """Distance oracle could not settle every vertex within the cap.

    ``achieved`` holds the per-vertex distances found so far (``None``
    for unreached vertices).
    """

    def __init__(self, message, achieved=None):
        super().__init__(message)
        self.achieved = achieved
