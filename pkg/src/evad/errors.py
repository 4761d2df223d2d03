"""Exception hierarchy shared across the engine."""


class EvadError(Exception):
    """Base class for all engine errors."""


class ZeroVector(EvadError):
    """A vector that must be normalizable has (near-)zero norm."""


class InvalidAlpha(EvadError):
    """Fusion coefficient outside [0, 1]."""


class DimensionMismatch(EvadError):
    """Vector or matrix dimensions disagree with the contract."""


class BadMagic(EvadError):
    """Feature container does not start with the expected magic bytes."""


class UnsupportedVersion(EvadError):
    """Feature container version is not understood."""


class TruncatedFile(EvadError):
    """Feature container ends before its declared payload."""


class NormViolation(EvadError):
    """A clip vector in a container is not unit-norm within tolerance."""


class NoNeighbors(EvadError):
    """Attention requested for a node with an empty neighbor set."""


class TooShort(EvadError):
    """Input stream has too few frames for the operation."""


class DegenerateLabels(EvadError):
    """Metric requires both positive and negative labels."""


class ScorerUnavailable(EvadError):
    """Scorer transport failed after retries."""


class ParseError(EvadError):
    """A text input file could not be parsed; message carries the line."""


class OverlappingRanges(EvadError):
    """Ground-truth annotation ranges overlap."""


class RangeOutOfBounds(EvadError):
    """Ground-truth annotation range exceeds the video length."""
