"""
Exception hierarchy for clustrec.

Every error raised on purpose by the package derives from ClustRecError. The CLI maps
the three top-level families onto stable exit codes.
"""

from typing import Optional


class ClustRecError(Exception):
    """Base exception for clustrec errors."""
    exit_code = 3


class ConfigError(ClustRecError):
    """Raised when a run configuration is invalid."""
    exit_code = 1


class DataError(ClustRecError):
    """Raised when input data or stored artifacts cannot be used."""
    exit_code = 2


class InternalError(ClustRecError):
    """Raised on broken internal invariants."""
    exit_code = 3


class IoError(DataError):
    """Raised when a file cannot be read or written."""
    pass


class ParseError(DataError):
    """Raised when a delimited file is malformed."""

    def __init__(self, message: str, row: Optional[int] = None, col: Optional[int] = None):
        super().__init__(message)
        self.row = row
        self.col = col


class EmptyAfterPreprocess(DataError):
    """Raised when preprocessing leaves no usable column or row."""
    pass


class InvalidParams(DataError):
    """Raised when hyperparameters do not fit an algorithm or dataset."""
    pass


class AllNoise(DataError):
    """Raised when a density method labels every point as noise."""
    pass


class NoValidConfiguration(DataError):
    """Raised when every grid point of a tuning run failed."""
    pass


class UndefinedCells(DataError):
    """Raised when a performance table has (dataset, algorithm) cells without a score."""
    pass


class UndefinedIndex(DataError):
    """Raised when a validity index is undefined for a partition."""
    pass


class DimensionMismatch(DataError):
    """Raised when vector or matrix shapes disagree."""
    pass


class LengthMismatch(DataError):
    """Raised when two rankings have different lengths."""
    pass


class MismatchedAxes(DataError):
    """Raised when performance tables do not share datasets and algorithms."""
    pass


class MissingEmbedding(DataError):
    """Raised when a dataset has no meta-feature vector."""
    pass


class DegenerateGroups(DataError):
    """Raised when ranking groups carry no pairwise preference."""
    pass


class SingleClassCorpus(DataError):
    """Raised when graph labels contain fewer than two classes."""
    pass


class TooFewPairs(DataError):
    """Raised when a paired test has too few non-zero differences."""
    pass


class TooFewSamples(DataError):
    """Raised when a significance test has too few methods or datasets."""
    pass


class CorruptArtifact(DataError):
    """Raised when a stored artifact fails checksum verification."""
    pass


class MissingArtifact(DataError):
    """Raised when a required artifact has not been produced yet."""
    pass
