"""Exception types shared across the toolkit."""


class IsacLabError(Exception):
    """Base class for all toolkit errors."""


class DegenerateGeometry(IsacLabError):
    """Target coincides with (or is numerically on top of) a network node."""


class BadSchedule(IsacLabError):
    """Hop schedule violates its construction contract."""


class NotCentered(IsacLabError):
    """Centered-mode Fisher computation received uncentered moments."""


class EmptySpectrum(IsacLabError):
    """Power spectrum carries no energy."""


class SingularGeometry(IsacLabError):
    """Geometry matrices too ill-conditioned to invert for a bound."""


class StepTooLarge(IsacLabError):
    """Finite-difference step failed the halving self-check."""


class EmptyBox(IsacLabError):
    """Search box contains no grid cell."""


class WindowMiss(IsacLabError):
    """Per-path search peak landed on the window boundary (outage)."""


class InsufficientPaths(IsacLabError):
    """Fewer than two usable paths for state fusion."""


class NotConverged(IsacLabError):
    """Iterative solver hit its iteration cap without meeting tolerances."""

    def __init__(self, message, estimate=None):
        super().__init__(message)
        self.estimate = estimate


class ConfigError(IsacLabError):
    """Invalid or missing configuration input."""
