"""Exception hierarchy.

Every error carries an ``exit_code`` so the command line front end can map
failures to distinct process statuses without a lookup table of its own.
"""

from __future__ import annotations


class GrowthLensError(Exception):
    """Base class for all errors raised by growthlens."""

    exit_code = 1


class ContractError(GrowthLensError, ValueError):
    """Caller violated an operation's preconditions (lengths, empty inputs...)."""

    exit_code = 3


class DomainError(GrowthLensError, ValueError):
    """A value lies outside the domain of a transform (e.g. non-positive GDP)."""

    exit_code = 4

    def __init__(self, message: str, year: float | None = None):
        super().__init__(message)
        self.year = year


class ParseError(GrowthLensError, ValueError):
    """Malformed input table. ``line``/``column`` are 1-based when known."""

    exit_code = 5

    def __init__(self, message: str, line: int | None = None, column: int | None = None):
        where = []
        if line is not None:
            where.append(f"line {line}")
        if column is not None:
            where.append(f"column {column}")
        if where:
            message = f"{message} ({', '.join(where)})"
        super().__init__(message)
        self.line = line
        self.column = column


class EntityNotFoundError(GrowthLensError, LookupError):
    exit_code = 6


class AmbiguousEntityError(GrowthLensError, LookupError):
    exit_code = 7


class DuplicateYearError(GrowthLensError, ValueError):
    exit_code = 8

    def __init__(self, message: str, year: float | None = None, line: int | None = None):
        if line is not None:
            message = f"{message} (line {line})"
        super().__init__(message)
        self.year = year
        self.line = line


class TooSparseError(GrowthLensError, ValueError):
    """Fewer observations than an operation needs."""

    exit_code = 9


class SingularityError(GrowthLensError, ValueError):
    """Evaluation at or beyond the singularity time ``a / k``."""

    exit_code = 10

    def __init__(self, message: str, singularity: float):
        super().__init__(message)
        self.singularity = singularity


class NotHyperbolicError(GrowthLensError, ValueError):
    """The reciprocal series does not decline, so no positive ``k`` exists."""

    exit_code = 11


class SingularDesignError(GrowthLensError, ValueError):
    """Regressor has zero variance; the line is not identified."""

    exit_code = 12


class SpecError(GrowthLensError, ValueError):
    """Invalid synthetic trajectory specification or simulation config."""

    exit_code = 13


class OutputError(GrowthLensError, OSError):
    exit_code = 14


class InputError(GrowthLensError, OSError):
    exit_code = 15


ALL_ERRORS = (
    GrowthLensError,
    ContractError,
    DomainError,
    ParseError,
    EntityNotFoundError,
    AmbiguousEntityError,
    DuplicateYearError,
    TooSparseError,
    SingularityError,
    NotHyperbolicError,
    SingularDesignError,
    SpecError,
    OutputError,
    InputError,
)
