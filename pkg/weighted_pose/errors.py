"""
Exception hierarchy for the Weighted Pose solver.
"""

from typing import Optional


class WeightedPoseError(Exception):
    """Base class for every error raised by this package."""


class InvalidTransform(WeightedPoseError, ValueError):
    """Rotation is not a proper orthonormal matrix, or arrays have the wrong shape."""


class InvalidProblem(WeightedPoseError, ValueError):
    """A CrossPoseProblem (or its parts) fails validation."""


class InvalidWeights(InvalidProblem):
    """All weights of a cloud, or all effective weights of a system, are zero."""


class DegenerateGeometry(WeightedPoseError):
    """The weighted de-meaned source stack has rank < 2; rotation is unrecoverable."""

    def __init__(self, message: str, singular_values=None):
        super().__init__(message)
        self.singular_values = singular_values


class OracleError(WeightedPoseError):
    """Analytic and finite-difference gradients disagree; the oracle refuses to run."""


class ScenarioFormatError(WeightedPoseError, ValueError):
    """A scenario file cannot be parsed or fails schema validation."""

    def __init__(
        self,
        message: str,
        path: Optional[str] = None,
        field: Optional[str] = None,
        line: Optional[int] = None,
    ):
        self.path = path
        self.field = field
        self.line = line
        super().__init__(message)

    def __str__(self) -> str:
        where = []
        if self.path:
            where.append(self.path)
        if self.line is not None:
            where.append(f"line {self.line}")
        if self.field:
            where.append(f"field '{self.field}'")
        msg = super().__str__()
        return f"{', '.join(where)}: {msg}" if where else msg
