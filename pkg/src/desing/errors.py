"""Exception hierarchy shared across the library.

Exit-code mapping used by the CLI lives in ``desing.cli``: schema problems
(exit 2) derive from SchemaError, numerical assertion failures (exit 1)
derive from NumericalAssertionError.
"""

from __future__ import annotations


class DesingError(Exception):
    """Base class for all library errors."""


class ShapeError(DesingError, ValueError):
    """Component array shape inconsistent with declared tensor orders."""


class RankError(DesingError, ValueError):
    """Tensor orders incompatible with the requested operation."""


class GridMismatchError(DesingError, ValueError):
    """Operands live on different chart grids."""


class MetricError(DesingError, ValueError):
    """Metric is not symmetric positive definite at some point."""


class ConditioningError(DesingError):
    """Per-point metric too close to singular for derived quantities."""

    def __init__(self, message: str, location=None):
        super().__init__(message)
        self.location = location


class DomainError(DesingError, ValueError):
    """Geometry parameter outside its admissible range."""


class SymmetryError(DesingError, ValueError):
    """Coefficient a is not symmetric with respect to the metric."""


class ExcludedExponentError(DesingError, ValueError):
    """Integrability exponent p in the excluded set {3/2, 3}."""


class TransformInconsistencyError(DesingError):
    """Desingularized coefficients fail the ellipticity they must inherit."""


class ConfigurationError(DesingError, ValueError):
    """Boundary face without a label, or inconsistent problem setup."""


class ResolutionError(DesingError, ValueError):
    """Grid too small for the requested difference stencil."""


class SchemaError(DesingError, ValueError):
    """Problem-spec file violates the schema.  Carries the field path."""

    def __init__(self, field_path: str, message: str):
        super().__init__(f"{field_path}: {message}")
        self.field_path = field_path


class ExpressionError(SchemaError):
    """Expression string failed to parse or used a forbidden construct."""

    def __init__(self, field_path: str, message: str):
        super().__init__(field_path, message)


class NumericalAssertionError(DesingError):
    """A named numerical invariant failed.  Carries the invariant id."""

    def __init__(self, invariant_id: str, message: str):
        super().__init__(f"[{invariant_id}] {message}")
        self.invariant_id = invariant_id


class StabilityError(DesingError):
    """Time stepping produced NaN/Inf.  Carries the failing step index."""

    def __init__(self, message: str, step: int):
        super().__init__(message)
        self.step = step


class SolverError(DesingError):
    """Linear system could not be solved; carries a conditioning estimate."""

    def __init__(self, message: str, condition_estimate=None):
        super().__init__(message)
        self.condition_estimate = condition_estimate


class ModeError(DesingError, ValueError):
    """Operation requires a different problem mode (e.g. autonomous)."""


class UndefinedRatioError(DesingError, ZeroDivisionError):
    """Diagnostic ratio has a vanishing denominator."""
