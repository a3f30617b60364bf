"""Exception hierarchy for loss-ratio-rj."""

from __future__ import annotations


class LossRatioError(Exception):
    """Base class for all library errors."""


class DataError(LossRatioError, ValueError):
    """Rejected input data; ``row`` is the zero-based offending row, if any."""

    def __init__(self, message: str, row: int | None = None) -> None:
        super().__init__(message if row is None else f"row {row}: {message}")
        self.row = row


class ConfigError(LossRatioError, ValueError):
    """Invalid run or sampler configuration."""


class ContractError(LossRatioError):
    """An operation was called with arguments violating its precondition."""
