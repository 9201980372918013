"""Exception hierarchy shared across the package.

Exit-code mapping used by the CLI: ConfigError -> 1, DataError -> 2,
ServiceError -> 3.
"""


class GapmineError(Exception):
    """Base class for all package errors."""


class ConfigError(GapmineError):
    """Invalid or inconsistent run configuration."""


class DataError(GapmineError):
    """Malformed, missing, or inconsistent input data."""


class MalformedRecordError(DataError):
    """A corpus record failed validation; carries file position context."""

    def __init__(self, path, line_no, field, message):
        self.path = str(path)
        self.line_no = line_no
        self.field = field
        super().__init__(f"{self.path}:{line_no}: field '{field}': {message}")


class DuplicateIdError(DataError):
    """An identifier appeared more than once where uniqueness is required."""


class MaskingError(DataError):
    """Conclusion masking could not be applied to a paragraph."""


class TemplateError(ConfigError):
    """Prompt template cannot be rendered with the given inputs."""


class ServiceError(GapmineError):
    """A remote completion or scoring service failed."""


class TransportError(ServiceError):
    """Network-level failure talking to a service; retriable."""


class RetryableServiceError(ServiceError):
    """Service signalled a transient condition (429/5xx); retriable."""


class ProviderError(ServiceError):
    """Service returned an error payload; surfaced verbatim, not retried."""


class ContextLengthError(ServiceError):
    """Prompt rejected for exceeding the model context window.

    Raised as a distinct type so callers can re-chunk instead of retrying.
    """


class MalformedScorerResponse(ServiceError):
    """Entailment scorer replied with an unusable payload."""
