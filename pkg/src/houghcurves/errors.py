"""Exception types shared across the package.

Argument misuse raises plain ValueError; the classes here mark
conditions the recognition pipeline and CLI treat specially.
"""


class DegeneratePointError(ValueError):
    """Point whose Hough polynomial is identically zero or drops degree."""

    def __init__(self, message, index=None):
        super().__init__(message)
        self.index = index


class SamplingError(RuntimeError):
    """On-curve sampler exhausted its attempt budget."""


class NoSignalError(RuntimeError):
    """Accumulator is all zero; there is no peak to return."""


class RecognitionError(RuntimeError):
    """End-to-end recognition could not produce an estimate."""
