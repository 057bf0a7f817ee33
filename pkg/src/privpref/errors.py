"""Exception hierarchy.

Every error carries an ``exit_code`` so the CLI can map failures onto its
documented exit statuses without a lookup table.
"""

from __future__ import annotations


class PrivPrefError(Exception):
    exit_code = 2


class DataError(PrivPrefError):
    """Bad input data or configuration (exit code 2)."""


class InvariantError(PrivPrefError):
    """An internal invariant did not hold (exit code 3)."""

    exit_code = 3


class UnknownChoice(DataError):
    pass


class SchemaMismatch(DataError):
    def __init__(self, message: str, row: int | None = None, column: str | None = None):
        where = []
        if row is not None:
            where.append(f"row={row}")
        if column is not None:
            where.append(f"column={column}")
        super().__init__(f"{message} ({', '.join(where)})" if where else message)
        self.row = row
        self.column = column


class ParseError(SchemaMismatch):
    pass


class ConfigInvalid(DataError):
    pass


class InsufficientDonors(DataError):
    pass


class NoSensitiveFeatures(DataError):
    pass


class AnonymizationInfeasible(DataError):
    pass


class EmptyClass(DataError):
    pass


class EmptyTrainingSet(DataError):
    pass


class DimensionMismatch(DataError):
    pass


class NonFiniteLoss(InvariantError):
    def __init__(self, batch_index: int, epoch: int):
        super().__init__(f"non-finite loss at epoch {epoch}, batch {batch_index}")
        self.batch_index = batch_index
        self.epoch = epoch


class TooSmall(DataError):
    pass


class LengthMismatch(DataError):
    pass
