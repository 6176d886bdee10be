"""Exception hierarchy shared by every module."""


class DskError(Exception):
    """Base class for all errors raised by dsksim."""


class InvalidArgumentError(DskError, ValueError):
    """An argument violates a documented precondition."""


class OutOfRegimeError(DskError, ValueError):
    """A closed-form expression is evaluated outside its validity region."""


class DelayOutOfWindowError(DskError, ValueError):
    """A requested delay does not fit inside the sampling window."""


class DegenerateReferenceError(DskError, ValueError):
    """A reference or observation cannot be normalised (zero entry)."""


class NoCrossingError(DskError, RuntimeError):
    """A coherence function never falls below the threshold.

    ``lower_bound`` holds the largest duration that was searched, so the
    true coherence time is known to exceed it.
    """

    def __init__(self, message: str, lower_bound: float | None = None):
        super().__init__(message)
        self.lower_bound = lower_bound


class NumericFailureError(DskError, ArithmeticError):
    """A numerical routine failed to converge or produced a non-finite value."""


class ConfigError(DskError, ValueError):
    """A configuration file or override is malformed."""


class CoherenceRegimeWarning(UserWarning):
    """Emitted when a coherence function is clipped to zero."""
