"""Exception hierarchy shared by the solver, peakon and criteria modules."""


class MuchLabError(Exception):
    """Base class for all library errors."""


class InvalidFieldError(MuchLabError, ValueError):
    """A sampled field contains NaN/Inf or has an unusable shape."""


class BlowupSuspectedError(MuchLabError, FloatingPointError):
    """A right-hand side evaluation produced non-finite values."""

    def __init__(self, message, t=None):
        super().__init__(message)
        self.t = t


class NoRealPeakonError(MuchLabError, ValueError):
    """The amplitude quadratic has no real root for the requested speed."""


class CollisionError(MuchLabError, ValueError):
    """Two peakon positions coincide (or come closer than the tolerance)."""


class BlowupTimeExceededError(MuchLabError, ValueError):
    """A closed-form characteristic solution was evaluated at or past its pole."""


class ConfigError(MuchLabError, ValueError):
    """A run configuration failed schema validation."""
