"""Exception hierarchy shared across the package.

Each class maps to one CLI exit code (see cli.EXIT_CODES).
"""


class WaveheadError(Exception):
    """Base class for all package errors."""


class ConfigError(WaveheadError):
    """Invalid configuration: unknown option, bad value, degenerate spec."""


class DataError(WaveheadError):
    """Invalid data content: bad labels, empty/single-class datasets."""


class FormatError(DataError):
    """Malformed binary file. Carries the byte offset where parsing failed."""

    def __init__(self, message: str, offset: int | None = None):
        if offset is not None:
            message = f"{message} (at byte {offset})"
        super().__init__(message)
        self.offset = offset


class UndefinedMetricError(DataError):
    """Metric is undefined for the given inputs (e.g. single-class AUC)."""


class ShapeError(WaveheadError):
    """Dimension or shape mismatch between arrays, files, or parameters."""
