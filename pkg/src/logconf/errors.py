"""Exception hierarchy shared by all modules."""


class LogConfError(Exception):
    """Base class for every error raised by this package."""


class NonFinite(LogConfError, ValueError):
    pass


class DimensionMismatch(LogConfError, ValueError):
    pass


class NoConvergence(LogConfError, RuntimeError):
    pass


class PreconditionViolated(LogConfError, ValueError):
    pass


class SingularResolvent(LogConfError, ValueError):
    pass


class ContourTooSmall(LogConfError, ValueError):
    pass


class NotPositiveDefinite(LogConfError, ValueError):
    pass


class SingularJacobian(NoConvergence):
    """Newton stopped on a vanishing pivot; a special case of non-convergence."""


class InsufficientHistory(LogConfError, ValueError):
    pass


class NoInteriorExtremum(LogConfError, ValueError):
    pass


class KernelOverflow(LogConfError, OverflowError):
    pass


class StepFailure(LogConfError, RuntimeError):
    """An explicit integrator produced an inadmissible state."""

    def __init__(self, message, time=None):
        super().__init__(message)
        self.time = time


class BlowUp(StepFailure):
    """The centerline stretch exceeded the blow-up guard."""

    def __init__(self, message, x=None):
        super().__init__(message, time=x)
        self.x = x


class ConfigError(LogConfError):
    pass


class ParseError(ConfigError):
    def __init__(self, message, line=None, column=None):
        where = f" (line {line}, column {column})" if line is not None else ""
        super().__init__(f"{message}{where}")
        self.line = line
        self.column = column


class ValidationError(ConfigError):
    """Raised with the full list of violations found in a config."""

    def __init__(self, violations):
        self.violations = list(violations)
        super().__init__("; ".join(self.violations))
