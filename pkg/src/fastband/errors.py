"""Exception types raised by fastband."""

__all__ = [
    "FastbandError",
    "NotPositiveDefinite",
    "SingularBandwidth",
    "DegenerateAxis",
    "OutOfRange",
    "ShapeMismatch",
    "TooFewPoints",
    "AllDuplicates",
    "UnknownModel",
    "ParseError",
]


class FastbandError(Exception):
    """Base class for all errors raised by this package."""


class NotPositiveDefinite(FastbandError):
    """A matrix that must be symmetric positive definite is not."""


class SingularBandwidth(FastbandError):
    """A bandwidth matrix is numerically singular."""


class DegenerateAxis(FastbandError):
    """All sample values coincide along one coordinate axis."""


class OutOfRange(FastbandError):
    """A scalar argument lies outside its documented range."""


class ShapeMismatch(FastbandError):
    """Array arguments have inconsistent shapes."""


class TooFewPoints(FastbandError):
    """The sample is too small for the requested operation."""


class AllDuplicates(FastbandError):
    """Deduplication removed every point but one."""


class UnknownModel(FastbandError):
    """A mixture model name is not in the catalog."""


class ParseError(FastbandError):
    """An input file could not be parsed."""
