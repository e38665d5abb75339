"""Torse-forming vector fields on space-form models: classification,
curvature audits and the local identities behind the hyperbolic
non-existence theorems."""

__version__ = "0.1.0"

from . import ad, catalog, classifier, spaces, tensor, theorems  # noqa: E402,F401
from .errors import (  # noqa: E402,F401
    ConfigError, CriticalPointError, DegeneracyError, DomainError, NumericError,
    PreconditionError, TFVError,
)

__all__ = [
    "ad", "catalog", "classifier", "spaces", "tensor", "theorems",
    "ConfigError", "CriticalPointError", "DegeneracyError", "DomainError", "NumericError",
    "PreconditionError", "TFVError", "__version__",
]
