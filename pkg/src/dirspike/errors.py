"""Exception types shared across the package."""


class DirspikeError(Exception):
    """Base class for all package-specific errors."""


class DimensionMismatch(DirspikeError, ValueError):
    """Two vectors that must live in the same space have different lengths."""


class ConfigError(DirspikeError, ValueError):
    """A config file or parameter set is malformed or out of range."""


class NoSubcriticalWindow(DirspikeError, ValueError):
    """Parameters admit no bistable window (requires beta1**2 > 4*beta2)."""


class IntegrationBlowup(DirspikeError, RuntimeError):
    """State norm exceeded the a-priori bound; the step size is too coarse."""

    def __init__(self, t: float, value: float, bound: float):
        self.t = t
        self.value = value
        self.bound = bound
        super().__init__(
            f"state norm {value:.6g} exceeded guard {bound:.6g} at t={t:.6g}; "
            "reduce dt or check inputs"
        )


class NormVanished(DirspikeError, RuntimeError):
    """The state norm hit zero, so direction (and alignment) is undefined."""

    def __init__(self, t: float):
        self.t = t
        super().__init__(f"state norm vanished at t={t:.6g}; direction undefined")


class ThresholdBracketError(DirspikeError, RuntimeError):
    """A requested threshold does not change character inside the scan range."""


class ObstacleSingularity(DirspikeError, RuntimeError):
    """The navigation state coincided with an obstacle point."""

    def __init__(self, t: float, index: int):
        self.t = t
        self.index = index
        super().__init__(f"robot position hit obstacle {index} at t={t:.6g}")
