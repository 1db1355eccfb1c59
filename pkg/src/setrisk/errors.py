"""Exception types shared across the engine."""
from .lp import ValidationError

__all__ = ["ValidationError", "AssumptionError", "ConsistencyError"]


class AssumptionError(ValueError):
    """A standing assumption fails on the given data (monotonicity, properness, ...)."""


class ConsistencyError(RuntimeError):
    """Two independent computations of the same quantity disagree."""
