"""Exception types shared across the toolkit.

Everything derives from PhenoKitError so callers can catch the whole
family; most also derive from ValueError (or KeyError) so generic code
keeps working.
"""


class PhenoKitError(Exception):
    """Base class for all phenokit errors."""


class InvalidParameterError(PhenoKitError, ValueError):
    """A parameter is outside its documented range."""


class ValidationError(PhenoKitError, ValueError):
    """Input data violates a documented invariant."""


class LabelParseError(ValidationError):
    """A label file line could not be parsed."""

    def __init__(self, message: str, line_number: int | None = None):
        self.line_number = line_number
        if line_number is not None:
            message = f"line {line_number}: {message}"
        super().__init__(message)


class DegenerateAnnotationError(ValidationError):
    """An annotation collapsed to zero area (e.g. clamped off the image)."""


class SeverityConflictError(ValidationError):
    """A plot carries more than one severity score."""


class ShapeError(PhenoKitError, ValueError):
    """Dimensions or alignment of paired inputs do not match."""


class OutOfBoundsError(PhenoKitError, ValueError):
    """A box or point lies outside its declared extent."""


class EmptyForegroundError(PhenoKitError, ValueError):
    """A mask has no foreground pixels."""


class EmptyInputError(PhenoKitError, ValueError):
    """An operation that needs at least one element received none."""


class MissingPredictionError(PhenoKitError, KeyError):
    """A replay manifest has no entry for the requested key."""
