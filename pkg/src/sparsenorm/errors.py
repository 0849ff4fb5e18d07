"""Exception hierarchy.

Every error raised by this package derives from :class:`SparseNormError`.
``exit_code`` distinguishes input problems (2) from computation problems (3)
for the command-line front end.
"""

from __future__ import annotations


class SparseNormError(Exception):
    """Base class for all package errors."""

    exit_code = 3


class InvalidConfigError(SparseNormError):
    """A configuration object or file violates its contract."""

    exit_code = 2


# --- input / ingest errors ---------------------------------------------------


class MalformedRowError(SparseNormError):
    """A data file row cannot be parsed; carries file and 1-based line number."""

    exit_code = 2

    def __init__(self, path, line_number: int, reason: str):
        super().__init__(f"{path}:{line_number}: {reason}")
        self.path = path
        self.line_number = line_number
        self.reason = reason


class DuplicateIdError(SparseNormError):
    """The same publication id appears more than once in a dataset."""

    exit_code = 2


class NegativeCountError(SparseNormError):
    """A mention count is negative."""

    exit_code = 2


class InvalidScoreError(SparseNormError):
    """A recommendation score lies outside the allowed set {1, 2, 3}."""

    exit_code = 2


class NegativeScoreError(SparseNormError):
    """An average recommendation score is negative."""

    exit_code = 2


# --- table / computation errors ----------------------------------------------


class InvalidCountsError(SparseNormError):
    """Cross-table cell counts violate their invariants."""


class EmptyTableError(SparseNormError):
    """An operation requires at least one stratum."""


class EmptyGroupError(SparseNormError):
    """An operation requires at least one group paper."""


class ZeroDenominatorError(SparseNormError):
    """A pooled denominator (total papers, or the pooled S term) is zero."""


class ZeroStratumSizeError(SparseNormError):
    """A stratum has zero papers on the side being averaged."""


class ZeroProportionError(SparseNormError):
    """A per-stratum proportion is zero and no correction policy is active."""


class ZeroWorldProportionError(ZeroProportionError):
    """A world proportion is zero and no correction policy is active."""


class MissingStratumError(SparseNormError):
    """A paper references a stratum absent from the supplied proportions."""


class ContinuityAlreadyAppliedError(SparseNormError):
    """The continuity correction was requested twice for the same table."""


class AllStrataRemovedError(SparseNormError):
    """Filtering removed every stratum."""


class DegenerateReplicatesError(SparseNormError):
    """More than half of the bootstrap replicates were incomputable."""
