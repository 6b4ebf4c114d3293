"""Exception hierarchy shared across the package."""

from __future__ import annotations


class CareloopError(Exception):
    """Base class for all package-specific errors."""


class InvalidSchemaError(CareloopError):
    """A constraint-schema node violates a structural invariant."""


class SchemaPathError(CareloopError):
    """A schema field selector did not resolve to a bindable node."""


class SchemaViolationError(CareloopError):
    """A structured model output failed validation after all retries."""

    def __init__(self, message: str, violations=()):
        super().__init__(message)
        self.violations = tuple(violations)


class GatewayTimeout(CareloopError):
    """A model call did not finish within its latency budget."""


class BackendUnreachableError(CareloopError):
    """The remote model endpoint could not be reached."""


class NoMatchingRuleError(CareloopError):
    """The scripted backend has no rule for a request and is not permissive."""


class UnknownTokenizerError(CareloopError):
    """A tokenizer reference is not registered."""


class DuplicateDocError(CareloopError):
    """A document id is already present in the corpus."""


class UnsupportedFormatError(CareloopError):
    """An ingestion source format is not supported."""


class MissingAbstractError(CareloopError):
    """Index construction requires every document to carry an abstract."""


class RetrievalError(CareloopError):
    """Invalid retrieval arguments (empty query set, non-positive budget)."""


class NoDocumentsRetrievedError(CareloopError):
    """Retrieval produced no documents, so no plan can be grounded."""


class CitationViolationError(CareloopError):
    """Strict citation verification found an out-of-provenance citation."""


class DeadlineExceededError(CareloopError):
    """A multi-stage pipeline ran past its overall deadline."""


class SessionError(CareloopError):
    """Session lifecycle violation (wrong status, unknown id, visit cap)."""


class UnknownSessionError(SessionError):
    """No session with the given id."""


class VisitLimitError(SessionError):
    """The session already reached its maximum visit count."""
