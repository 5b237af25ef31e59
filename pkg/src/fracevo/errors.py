"""Exception hierarchy shared across the package."""


class FracevoError(Exception):
    """Base class for all package errors."""


class ParameterError(FracevoError, ValueError):
    """A mathematical parameter is outside its admissible range."""


class DataError(FracevoError, ValueError):
    """Input data is malformed: shape mismatch, too few samples, bad norms."""


class DomainError(FracevoError, ValueError):
    """Function evaluated at a point outside its domain (e.g. a pole)."""


class AccuracyError(FracevoError, ArithmeticError):
    """No evaluation scheme certifies the requested tolerance.

    Raised instead of silently returning a degraded value.
    """


class SingularityError(FracevoError, ZeroDivisionError):
    """A shifted solve hit (or nearly hit) a spectral point."""


class ConfigError(FracevoError, ValueError):
    """Run configuration failed validation; `field` names the offending entry."""

    def __init__(self, field, reason):
        self.field = field
        self.reason = reason
        super().__init__(f"{field}: {reason}")
