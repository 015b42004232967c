"""Exception hierarchy.

Every error carries a stable snake_case ``name`` which the command line
front end reports. Validation-type errors map to exit status 1, analysis
errors (numeric, stability, degeneracy) to exit status 2.
"""

from __future__ import annotations


class OQHOError(Exception):
    name = "oqho_error"


class ValidationError(OQHOError, ValueError):
    name = "validation_error"


class DimensionError(ValidationError):
    name = "dimension_error"


class DefinitenessError(ValidationError):
    name = "definiteness_error"

    def __init__(self, message: str, eigenvalue: float | None = None):
        super().__init__(message)
        self.eigenvalue = eigenvalue


class ParameterError(ValidationError):
    name = "parameter_error"


class NumericError(OQHOError, ArithmeticError):
    name = "numeric_error"


class HorizonError(NumericError):
    name = "horizon_error"


class DegeneracyError(NumericError):
    name = "degeneracy_error"

    def __init__(self, message: str, pair: tuple[int, int] | None = None):
        super().__init__(message)
        self.pair = pair


class StabilityError(OQHOError):
    name = "stability_error"


class WeakCouplingUnstable(StabilityError):
    name = "weak_coupling_unstable"


class ConsistencyError(OQHOError):
    name = "internal_consistency_error"
