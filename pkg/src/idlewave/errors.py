"""Exception types shared across the package."""


class IdlewaveError(Exception):
    """Base class for all package-specific errors."""


class ConfigError(IdlewaveError, ValueError):
    """Invalid specification, scenario file, or parameter combination."""


class HistoryUnderrunError(IdlewaveError, LookupError):
    """A lagged phase was requested from before the retained history window."""


class StiffnessError(IdlewaveError, RuntimeError):
    """Adaptive step size underflowed; the problem is too stiff for the solver."""

    def __init__(self, t: float, h: float):
        self.t = t
        self.h = h
        super().__init__(f"step size underflow (h={h:.3e}) at t={t:.6g}")


class InsufficientSignalError(IdlewaveError, RuntimeError):
    """Too few processes registered a wave arrival to fit a speed."""


class UnsupportedMetricError(IdlewaveError, ValueError):
    """The trajectory's topology does not support the requested metric."""
