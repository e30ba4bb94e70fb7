"""Exception types shared across the package."""


class OmegaSgError(Exception):
    """Base class for all errors raised by this package."""


class InvalidOperatorError(OmegaSgError, ValueError):
    """An operator description violates a structural constraint."""


class InvalidVectorError(OmegaSgError, ValueError):
    """A sequence-vector description violates a structural constraint."""


class DomainError(OmegaSgError, ValueError):
    """A numeric argument is outside an operation's domain (t < 0, eps <= 0, ...)."""


class ResourceLimitError(OmegaSgError, RuntimeError):
    """A configurable resource cap was exceeded.

    ``count`` records how far the computation got (entries or indices seen)
    when it gave up; exceeding the cap is an explicit error, never a silent
    truncation.
    """

    def __init__(self, message: str, count: int):
        super().__init__(message)
        self.count = count
