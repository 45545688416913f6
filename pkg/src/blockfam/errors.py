"""Exception and warning types shared across the package."""
from __future__ import annotations

__all__ = [
    "BlockfamError",
    "ShapeError",
    "AliasingError",
    "NotPositiveDefiniteError",
    "SingularMatrixError",
    "SkewSymmetryError",
    "TreeParseError",
    "TreeValidationError",
    "SingularFactorWarning",
]


class BlockfamError(Exception):
    """Base class for errors raised by this package."""


class ShapeError(BlockfamError, ValueError):
    """Dimension or range mismatch."""


class AliasingError(BlockfamError, ValueError):
    """An output view overlaps an input view it must not alias."""


class NotPositiveDefiniteError(BlockfamError, ArithmeticError):
    """Cholesky hit a non-positive pivot; .index is the global row."""

    def __init__(self, index: int):
        self.index = index
        super().__init__(f"matrix is not positive definite: non-positive pivot at index {index}")


class SingularMatrixError(BlockfamError, ArithmeticError):
    """A triangular solve hit an exactly-zero diagonal entry."""

    def __init__(self, index: int, what: str = "triangular factor"):
        self.index = index
        super().__init__(f"singular {what}: zero diagonal at index {index}")


class SkewSymmetryError(BlockfamError, ValueError):
    """Input violated the skew-symmetry contract."""


class TreeParseError(BlockfamError, ValueError):
    """Control-tree document is not syntactically valid JSON."""


class TreeValidationError(BlockfamError, ValueError):
    """Control tree violates the schema or problem compatibility.

    .violations is a list of (path, reason) pairs.
    """

    def __init__(self, violations: list[tuple[str, str]]):
        self.violations = violations
        lines = "; ".join(f"{path}: {reason}" for path, reason in violations)
        super().__init__(f"invalid control tree: {lines}")


class SingularFactorWarning(UserWarning):
    """LU met an exactly-zero pivot column; factorization continued."""
