"""Exception types shared across the package."""


class UsageError(ValueError):
    """Caller passed arguments that violate an operation's contract."""


class ConfigurationError(ValueError):
    """Requested size or mode is outside the supported desk-scale range."""


class ConvergenceError(RuntimeError):
    """An iterative reference computation failed to reach its tolerance."""
