"""Exception types shared across the package."""


class ConfigError(ValueError):
    """A configuration file or override is malformed or out of range."""


class FormatError(ValueError):
    """A binary field dump is corrupt or carries the wrong magic."""


class UnsupportedVersion(FormatError):
    """A field dump was written by an incompatible format version."""


class HyperbolicityLoss(ValueError):
    """The advection symbol has a complex spectrum (f * rho < 0)."""


class PositivityLoss(RuntimeError):
    """The density reached the vacuum floor somewhere on the grid.

    Carries the simulation time at which the violation was detected
    (``time`` is None for static checks outside a run).
    """

    def __init__(self, message: str, time: float | None = None):
        super().__init__(message)
        self.time = time


class NumericalBlowup(RuntimeError):
    """A state or tendency stopped being finite (NaN/Inf detected).

    ``time`` is the last valid simulation time; ``state`` the offending
    snapshot when available.
    """

    def __init__(self, message: str, time: float | None = None, state=None):
        super().__init__(message)
        self.time = time
        self.state = state
