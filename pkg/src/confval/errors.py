"""Shared exception hierarchy."""


class ConfvalError(Exception):
    """Base class for all errors raised by this package."""


class ConfigParseError(ConfvalError):
    """A configuration document could not be parsed."""

    def __init__(self, message: str, location: str | None = None):
        self.location = location
        if location:
            message = f"{message} (at {location})"
        super().__init__(message)


class SpecError(ConfvalError):
    """A parameter specification document is invalid."""


class UnknownParameterError(ConfvalError):
    """A configuration entry has no spec and no version record."""


class DependencyEvalError(ConfvalError):
    """A dependency constraint could not be evaluated (bad operand types)."""


class GenerationError(ConfvalError):
    """A valid or invalid value could not be generated for a spec."""


class InsufficientShotsError(ConfvalError):
    """The shot pools cannot satisfy the requested combination."""


class TokenBudgetExceededError(ConfvalError):
    """The target file plus question exceed the token limit even compressed."""


class ResponseFormatError(ConfvalError):
    """A backend completion could not be parsed into a response record."""


class ValidationFailedError(ConfvalError):
    """No query slot produced an accepted response."""


class BackendError(ConfvalError):
    """A backend query failed.

    category is one of: transport, http, rate_limit, auth, timeout, protocol.
    """

    def __init__(self, message: str, category: str, retryable: bool):
        super().__init__(message)
        self.category = category
        self.retryable = retryable
