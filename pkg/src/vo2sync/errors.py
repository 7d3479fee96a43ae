"""Exception hierarchy shared by all modules."""


class VO2SyncError(Exception):
    """Base class for every error raised by the package."""


class ValidationError(VO2SyncError, ValueError):
    """A configuration value or argument violates its documented constraint.

    ``key`` holds the offending key path when the error comes from a config file.
    """

    def __init__(self, message, key=None):
        self.key = key
        self.reason = message
        if key is not None:
            message = f"{key}: {message}"
        super().__init__(message)


class ParseError(ValidationError):
    """A data file could not be parsed; ``line`` is the 1-based line number."""

    def __init__(self, message, line=None, path=None):
        self.line = line
        self.path = path
        where = "" if path is None else f"{path}: "
        if line is not None:
            where += f"line {line}: "
        super().__init__(where + message)


class DomainError(VO2SyncError, ValueError):
    """An operation was called outside its mathematical domain."""


class SaturatedHeatingError(DomainError):
    """External heating leaves no headroom for the switch to stay OFF."""


class NumericalError(VO2SyncError, ArithmeticError):
    """A numerical routine (quadrature, bracketing, root search) failed."""
