"""Exception hierarchy shared by the inscribed package."""


class InscribedError(Exception):
    """Base class for all package errors."""


class CurveParseError(InscribedError, ValueError):
    """A curve description could not be parsed."""


class InvalidInputError(InscribedError, ValueError):
    pass


class EmbeddingError(InscribedError):
    """Sampled immersion or self-intersection check failed."""


class SmoothingTooLargeError(EmbeddingError):
    pass


class RetryExhaustedError(EmbeddingError):
    pass


class UnsupportedOrderError(InscribedError, ValueError):
    pass


class AccuracyError(InscribedError):
    """Quadrature did not reach the requested tolerance."""

    def __init__(self, message, achieved=None):
        super().__init__(message)
        self.achieved = achieved


class SingularPointError(InscribedError):
    """Continuation met a rank drop of the residual Jacobian away from a fold."""


class InsufficientDataError(InscribedError, ValueError):
    pass


class NotCheckableError(InscribedError):
    pass
