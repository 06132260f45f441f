"""Exception types shared across framelab."""


class FrameLabError(Exception):
    """Base class for all framelab errors."""


class DomainError(FrameLabError, ValueError):
    """An operation was asked to act outside its mathematical domain."""


class PreconditionError(FrameLabError, ValueError):
    """An input violates a documented precondition (e.g. a non-unit quaternion)."""


class DegenerateFrameError(DomainError):
    """The quaternion frame is undefined because the swing rate vanishes."""


class StepSizeError(FrameLabError, ValueError):
    """A time or arc-length step is too large (or non-positive) for the integrator."""


class ConfigError(FrameLabError, ValueError):
    """A run configuration failed validation."""
