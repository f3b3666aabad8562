"""Exception types shared across the package."""


class AsymDirError(Exception):
    """Base class for all errors raised by asymdir."""


class DomainError(AsymDirError, ValueError):
    """An argument lies outside the domain of an operation."""


class RangeError(DomainError):
    """A value lies outside the range of a monotone map (e.g. ``y >= sup a``)."""


class PreconditionError(AsymDirError):
    """A structural precondition (curvature bound, barrier height, ...) fails."""


class CalibrationError(AsymDirError):
    def __init__(self, message, best_value=None):
        super().__init__(message)
        self.best_value = best_value


class IntegratorError(AsymDirError):
    def __init__(self, message, worst_residual=None):
        super().__init__(message)
        self.worst_residual = worst_residual


class VerificationError(AsymDirError):
    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report


class NonConvergenceError(AsymDirError):
    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class ConfigError(AsymDirError):
    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line
