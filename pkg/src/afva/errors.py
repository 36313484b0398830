"""Exception types shared across the toolkit.

Argument-contract violations (empty inputs, bad sizes) raise plain
``ValueError``; everything with domain meaning gets a named class so callers
can tell failure modes apart.
"""


class AfvaError(Exception):
    """Base class for all toolkit-specific errors."""


class DecodeError(AfvaError):
    """Image byte stream could not be decoded."""


class FormatError(AfvaError):
    """A file does not match its expected container format."""


class CorruptionError(FormatError):
    """A file's header and payload disagree (truncation, bad sizes)."""


class DimensionError(AfvaError):
    """A vector or matrix has the wrong number of entries."""


class NormalizationError(AfvaError):
    """Values that must form a probability distribution do not sum to 1."""


class DomainError(AfvaError):
    """A value lies outside its permitted range."""


class DataError(AfvaError):
    """Dataset-level problem: missing labels, empty joins, bad records."""


class DivergenceError(AfvaError):
    """Training produced a non-finite loss."""

    def __init__(self, message: str, epoch: int, step: int):
        super().__init__(message)
        self.epoch = epoch
        self.step = step


class QuotaError(AfvaError):
    """A worker has exhausted their rating quota."""


class ConflictError(AfvaError):
    """A (worker, image) pair was rated more than once."""


class OrderingError(AfvaError):
    """A rating was submitted for an image that is not the current item."""


class RatingValidationError(AfvaError):
    """A submitted rating payload fails validation."""


class UnknownResourceError(AfvaError):
    """Lookup of an image, session, or record failed."""
