"""Exception hierarchy shared across the library.

Two broad families drive the CLI exit codes: ``DataError`` for malformed
or inconsistent inputs (exit 3) and ``NumericError`` for mathematically
undefined requests or numerical blow-ups (exit 4).
"""


class DataError(Exception):
    """Malformed, inconsistent, or missing input data."""


class NumericError(Exception):
    """A computation that is mathematically undefined or numerically invalid."""


# -- corpus ----------------------------------------------------------------

class MalformedLineError(DataError):
    """A corpus or manifest line does not match the record schema."""

    def __init__(self, line_number: int, message: str):
        self.line_number = line_number
        super().__init__(f"line {line_number}: {message}")


class DuplicateIdError(DataError):
    """Two records claim the same ID."""


class DanglingReferenceError(DataError):
    """An anime references a character ID that is never defined."""


# -- scoring ---------------------------------------------------------------

class UndefinedScoreError(NumericError):
    """A mean score was requested for an anime with zero voters."""


class DegenerateScaleError(NumericError):
    """Min-max scaling was requested over fewer than two distinct values."""


# -- splitter --------------------------------------------------------------

class InfeasibleSplitError(DataError):
    """No cluster arrangement can realize the requested train fraction."""


# -- features --------------------------------------------------------------

class EmbeddingFormatError(DataError):
    """The embedding (or portrait) container violates its binary layout."""


class BadMagicError(EmbeddingFormatError):
    """The file does not start with the expected magic bytes."""


class VersionMismatchError(EmbeddingFormatError):
    """The container's format version is not supported."""


class TruncatedFileError(EmbeddingFormatError):
    """The file ended before the declared records were read."""


class DimensionMismatchError(EmbeddingFormatError):
    """A record's vector dimension does not match its declared kind."""


class NonFiniteVectorError(DataError):
    """An embedding or feature vector contains NaN or infinity."""


class EmptyVocabularyError(DataError):
    """TF-IDF fitting saw no tokens at all."""


class MissingEmbeddingError(DataError):
    """The embedding store lacks a required (anime, kind) vector."""


class MissingFeatureError(DataError):
    """A split member has no feature vector."""


# -- nn --------------------------------------------------------------------

class ShapeMismatchError(DataError):
    """Operand shapes are incompatible."""


class LayerChainError(DataError):
    """Adjacent layer dimensions in a network spec do not chain."""


class NonFiniteError(NumericError):
    """An operation produced NaN or infinity."""


class BackwardBeforeForwardError(NumericError):
    """backward() was called with no recorded forward pass."""


# -- checkpoints -----------------------------------------------------------

class CheckpointFormatError(DataError):
    """The checkpoint container violates its binary layout."""


class SpecHashMismatchError(CheckpointFormatError):
    """The checkpoint's recorded spec hash does not match its descriptor."""


# -- pipeline --------------------------------------------------------------

class UndefinedCorrelationError(NumericError):
    """A correlation was requested over a constant (or all-tied) input."""


class EmptyTestSetError(DataError):
    """Evaluation was requested on an empty test set."""
