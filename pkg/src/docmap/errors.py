"""Exception types shared across the pipeline."""


class DocmapError(Exception):
    """Base class for all errors raised by this package."""


class CorpusError(DocmapError):
    """Corpus input is unreadable, empty, or contains malformed records."""


class UnmappableTextError(DocmapError):
    """Text has no in-vocabulary terms and cannot be placed in the space."""


class UnknownIdError(DocmapError):
    """A document id is not present in the map."""


class MapFileError(DocmapError):
    """Map file cannot be loaded.

    ``kind`` is one of "version", "checksum", "corrupt".
    """

    def __init__(self, kind, message):
        super().__init__(message)
        self.kind = kind


class CohortError(DocmapError):
    """Synthetic subjects do not form a valid pretraining cohort."""
