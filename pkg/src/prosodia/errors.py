"""Exception hierarchy shared by all prosodia modules."""


class ProsodiaError(Exception):
    """Base class for all errors raised by this package."""


class ValidationError(ProsodiaError):
    """Invalid inputs: bad shapes, violated invariants, bad configuration."""


class FormatError(ProsodiaError):
    """Malformed on-disk data: wrong magic, version, or byte counts."""


class NumericError(ProsodiaError):
    """Numerically degenerate or non-finite values encountered at runtime."""


class AutodiffError(ProsodiaError):
    """Misuse of the computation graph (non-scalar backward, double backward)."""
