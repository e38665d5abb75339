"""Exception types raised by the engine."""


class TFVError(Exception):
    """Base class for all engine errors."""


class ConfigError(TFVError):
    """Unknown space/field id, bad dimension, or an empty sampling region."""


class DomainError(TFVError, ValueError):
    """A point lies outside the validity region of its chart."""


class NumericError(TFVError, ArithmeticError):
    """Singular metric, rank loss, or a failed internal consistency check."""


class DegeneracyError(TFVError, ValueError):
    """Degenerate input: a near-zero field value or a degenerate tangent plane."""


class PreconditionError(TFVError, ValueError):
    """An operation was called on inputs outside its stated preconditions."""


class CriticalPointError(DegeneracyError):
    """The gradient vanished along a flow trajectory."""
