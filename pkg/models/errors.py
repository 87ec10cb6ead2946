from typing import Any, Dict, List, Optional, Tuple


class CurvFlowError(Exception):
    """Base class for every error raised by curvflow."""
    code = "curvflow_error"

    def __init__(self, message: str, **context: Any):
        super().__init__(message)
        self.message = message
        self.context = context

    def to_dict(self) -> dict:
        """Convert to dictionary for error JSON."""
        return {
            "error": self.code,
            "message": self.message,
            "context": {k: _jsonable(v) for k, v in self.context.items()},
        }


def _jsonable(value: Any) -> Any:
    if isinstance(value, (str, int, bool)) or value is None:
        return value
    try:
        return float(value)
    except (TypeError, ValueError):
        return str(value)


class DomainError(CurvFlowError):
    code = "domain_error"


class DimensionMismatch(CurvFlowError):
    code = "dimension_mismatch"


class AsymmetricDirection(CurvFlowError):
    code = "asymmetric_direction"


class SingularInput(CurvFlowError):
    code = "singular_input"


class NumericalAbort(CurvFlowError):
    """Errors that stop a running flow; mapped to exit status 2."""
    code = "numerical_abort"


class NonConvexState(NumericalAbort):
    code = "non_convex_state"


class BlowUp(NumericalAbort):
    code = "blow_up"


class ExtinctionReached(NumericalAbort):
    code = "extinction_reached"


class OutsideCap(NumericalAbort):
    code = "outside_cap"


class NonConvexCurve(NumericalAbort):
    code = "non_convex_curve"


class EmptySublevel(CurvFlowError):
    code = "empty_sublevel"


class NotEnclosedInitially(CurvFlowError):
    code = "not_enclosed_initially"


class ConstraintViolated(CurvFlowError):
    code = "constraint_violated"


class ParseError(CurvFlowError):
    code = "parse_error"

    def __init__(self, message: str, line: int = 1, column: int = 1, source: Optional[str] = None):
        super().__init__(f"{message} (line {line}, column {column})",
                         line=line, column=column, source=source)
        self.line = line
        self.column = column


class ValidationError(CurvFlowError):
    """Collects every invalid field instead of stopping at the first."""
    code = "validation_error"

    def __init__(self, errors: List[Tuple[str, str]]):
        self.errors = list(errors)
        summary = "; ".join(f"{field}: {msg}" for field, msg in self.errors)
        super().__init__(summary)

    def to_dict(self) -> Dict[str, Any]:
        data = super().to_dict()
        data["errors"] = [{"field": f, "message": m} for f, m in self.errors]
        return data
