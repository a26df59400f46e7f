"""Semantic exceptions shared across the package."""

from __future__ import annotations


class UavPlaceError(Exception):
    """Base class for package errors."""


class QuadratureError(UavPlaceError):
    """Numerical integration failed to meet the requested tolerance.

    Carries the partial estimate and its estimated error so a caller can
    decide whether the result is still usable.
    """

    def __init__(self, message: str, partial: float, error_estimate: float):
        super().__init__(message)
        self.partial = partial
        self.error_estimate = error_estimate


class AscentError(UavPlaceError):
    """Local ascent did not converge; carries the best iterate found."""

    def __init__(self, message: str, best_point, best_value: float):
        super().__init__(message)
        self.best_point = best_point
        self.best_value = best_value


class OptimizerAbort(UavPlaceError):
    """An optimizer run was aborted; carries the partial run record."""

    def __init__(self, message: str, partial_record=None):
        super().__init__(message)
        self.partial_record = partial_record


class SpecValidationError(UavPlaceError):
    """Experiment specification failed validation.

    ``violations`` lists every problem found, not just the first.
    """

    def __init__(self, violations: list[str]):
        super().__init__("invalid experiment spec:\n  - " + "\n  - ".join(violations))
        self.violations = list(violations)
