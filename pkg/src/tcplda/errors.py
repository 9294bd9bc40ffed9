"""Exception hierarchy shared by every tcplda module."""


class PldaError(ValueError):
    """Base class for data, model and numerical errors raised by tcplda."""


class NotPositiveDefinite(PldaError):
    """A Cholesky pivot was not strictly positive."""

    def __init__(self, message="matrix is not positive definite", pivot_index=None, pivot=None):
        super().__init__(message)
        self.pivot_index = pivot_index
        self.pivot = pivot


class DimensionMismatch(PldaError):
    pass


class TooFewClasses(PldaError):
    pass


class AlignmentError(PldaError):
    pass


class EmptyEnrollment(PldaError):
    pass


class NonFiniteLikelihood(PldaError):
    pass


class FormatError(PldaError):
    """A text file did not follow its declared format.

    ``lineno`` is 1-based when the offending line is known.
    """

    def __init__(self, message, lineno=None):
        if lineno is not None:
            message = f"line {lineno}: {message}"
        super().__init__(message)
        self.lineno = lineno
