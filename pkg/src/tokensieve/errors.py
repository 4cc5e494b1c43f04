"""Exception types shared across the package."""

from __future__ import annotations


class TokenSieveError(Exception):
    """Base class for all package errors."""


class SentenceTooLong(TokenSieveError):
    """A single sentence exceeds the requested fragment length."""


class SequenceTooLong(TokenSieveError):
    """An assembled input exceeds the model's maximum sequence length."""


class EmptyMask(TokenSieveError):
    """A loss was requested over a gradient mask with no active positions."""


class NonFiniteLoss(TokenSieveError):
    """Training aborted because a batch produced a NaN/inf loss."""

    def __init__(self, batch_index: int, message: str = "") -> None:
        self.batch_index = batch_index
        super().__init__(message or f"non-finite loss at batch {batch_index}")


class OverlappingSpans(TokenSieveError):
    """Selected spans overlap or are out of order."""


class HaystackTooShort(TokenSieveError):
    """The haystack corpus has fewer tokens than the requested length."""


class EmptyContext(TokenSieveError):
    """A downstream answer was requested over an empty optimized context."""


class NoSupport(TokenSieveError):
    """Backward synthesis found no fragment supporting the answer."""


class ClientError(TokenSieveError):
    """Base class for LLM client failures; carries the request id."""

    def __init__(self, request_id: int, message: str) -> None:
        self.request_id = request_id
        super().__init__(f"request {request_id}: {message}")


class Timeout(ClientError):
    """The endpoint did not answer within the configured timeout."""


class HttpError(ClientError):
    """The endpoint answered with a non-success HTTP status."""

    def __init__(self, request_id: int, status: int, message: str = "") -> None:
        self.status = status
        super().__init__(request_id, message or f"HTTP status {status}")


class ParseError(ClientError):
    """The endpoint answered with a body that does not parse."""
