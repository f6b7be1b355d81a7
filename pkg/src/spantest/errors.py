"""Exception hierarchy for spantest.

Every error raised on a documented failure path derives from
:class:`SpantestError`, so callers (CLI, service) can catch one base class
and map it to a clean diagnostic instead of a traceback.
"""

from __future__ import annotations


class SpantestError(Exception):
    """Base class for all spantest errors."""


class ConstantColumn(SpantestError):
    """A panel column has zero sample standard deviation."""

    def __init__(self, index: int):
        self.index = index
        super().__init__(f"column {index} is constant (zero standard deviation)")


class AsymmetryExceedsTolerance(SpantestError):
    """Input to vech deviates from symmetry by more than the allowed tolerance."""


class EigenFailure(SpantestError):
    """Symmetric eigendecomposition did not converge or returned non-finite output."""


class RankDeficient(SpantestError):
    """A matrix that must have full (column) rank is numerically rank deficient."""


class DimensionMismatch(SpantestError):
    """Two panels that must share the cross-sectional dimension do not."""


class SegmentTooShort(SpantestError):
    """A pre- or post-break segment is too short for the requested factor count."""


class InvalidFactorOrder(SpantestError):
    """The second factor count exceeds the first in the unequal-counts workflow."""


class SingularLongRunVariance(SpantestError):
    """The long-run variance matrix is too ill-conditioned to invert."""

    def __init__(self, condition_number: float):
        self.condition_number = condition_number
        super().__init__(
            f"long-run variance matrix is numerically singular "
            f"(condition number {condition_number:.3e})"
        )


class UnknownFamily(SpantestError):
    """Data-generating-process family name is not recognized."""


class InvalidDgpSpec(SpantestError):
    """A simulation specification has parameters outside the supported grids."""


class ExcessiveFailures(SpantestError):
    """More than 1% of Monte Carlo replications raised errors."""


class CsvError(SpantestError):
    """Base class for CSV ingestion errors."""


class ParseError(CsvError):
    """A CSV cell could not be parsed as a finite number."""

    def __init__(self, row: int, col: int, message: str = ""):
        self.row = row
        self.col = col
        detail = f": {message}" if message else ""
        super().__init__(f"cannot parse cell at row {row}, column {col}{detail}")


class RaggedRows(CsvError):
    """CSV rows do not all have the same number of fields."""


class EmptyFile(CsvError):
    """CSV file contains no data rows."""
