"""Exception types shared across the package."""


class UstAlignError(Exception):
    """Base class for all library errors."""


class GridMismatch(UstAlignError):
    """Operands live on time grids of different lengths."""


class SpaceMismatch(UstAlignError):
    """Operands belong to different metric spaces or have wrong shapes."""


class SignalTooShort(UstAlignError):
    """A signal needs at least two samples."""


class DegenerateSignal(UstAlignError):
    """Signal has zero path length and strict mode was requested."""


class AngleNearPi(UstAlignError):
    """Rotation angle within 1e-6 of pi: the matrix log branch is ambiguous."""


class StepTooLarge(UstAlignError):
    """Delta step leaves fewer than two samples."""


class EmptyTemplateSet(UstAlignError):
    """Classification requires at least one template."""


class SingularWeightIntegral(UstAlignError):
    """The integral of W(t)^-1 is numerically singular."""


class IllConditioned(UstAlignError):
    """A per-sample matrix is too ill conditioned to invert reliably."""


class ParseError(UstAlignError):
    """Malformed signal file; carries the offending line number."""

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class SchemaMismatch(UstAlignError):
    """File header declares a different space than expected."""


class NonMonotoneTime(UstAlignError):
    """Time column must be strictly increasing."""


class BadRotation(UstAlignError):
    """Stored rotation block is not close enough to a proper rotation."""
