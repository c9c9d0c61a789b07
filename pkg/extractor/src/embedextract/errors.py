"""Error taxonomy for the extraction tool.

ExtractionError covers everything the tool can reject; the CLI maps the
subclasses onto exit codes (2 usage, 3 data).
"""


class ExtractionError(Exception):
    """Base class for extraction failures."""


class CorpusError(ExtractionError):
    """Corpus file is unreadable or malformed."""


class ModelLoadError(ExtractionError):
    """A text or vision model could not be loaded."""


class EmptyTextError(ExtractionError):
    """Text input is empty after stripping; nothing to embed."""


class UnreadableImageError(ExtractionError):
    """A portrait image is missing or cannot be decoded."""


class StoreError(ExtractionError):
    """A vector does not conform to the embedding-file contract."""
