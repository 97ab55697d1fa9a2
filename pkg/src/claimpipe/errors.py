"""Exception hierarchy shared across the pipeline."""

from __future__ import annotations


class ClaimPipeError(Exception):
    """Base class for all pipeline errors."""

    code = "error"


class ValidationError(ClaimPipeError):
    """An invariant or precondition was violated by caller input."""

    code = "validation_error"


class RegistryMissError(ClaimPipeError):
    """Lookup of an unknown document type in the schema registry."""

    code = "registry_miss"


class DecodeError(ClaimPipeError):
    """Input payload could not be decoded (corrupt or unrecognized)."""

    code = "decode_error"


class EmptyDocumentError(ClaimPipeError):
    """Document decoded successfully but contains zero pages."""

    code = "empty_document"


class FileTooLargeError(ClaimPipeError):
    """Input exceeds the configured size cap (rejected before decode)."""

    code = "file_too_large"


class BackendUnavailableError(ClaimPipeError):
    """A remote backend timed out or was unreachable after retries."""

    code = "backend_unavailable"


class ProtocolError(ClaimPipeError):
    """A backend answered, but with a malformed or unexpected response."""

    code = "protocol_error"


class FixtureMissError(ProtocolError):
    """A fixture backend has no entry for the requested key."""

    code = "fixture_miss"


class UnparseableOutputError(ClaimPipeError):
    """Model output contained no parseable JSON object."""

    code = "unparseable_output"


class FitError(ClaimPipeError):
    """Vectorizer fitting failed (e.g. empty vocabulary after filtering)."""

    code = "fit_error"


class TrainingError(ClaimPipeError):
    """Classifier training failed (e.g. fewer than two classes)."""

    code = "training_error"


class ClassificationUnavailableError(ClaimPipeError):
    """Neither the title path nor the ML fallback could run."""

    code = "classification_unavailable"


class ReferenceIndexError(ClaimPipeError):
    """Reference index construction failed (e.g. no usable names)."""

    code = "reference_index_error"


class NotFoundError(ClaimPipeError):
    """A claim, page, or field was not found in the store."""

    code = "not_found"


class StorageError(ClaimPipeError):
    """Result store could not persist or load a record."""

    code = "storage_error"
