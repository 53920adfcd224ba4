"""Exception types raised by the numerical routines."""


class DPMeansError(Exception):
    """Base class for all package errors."""


class QuadratureError(DPMeansError):
    """Adaptive integration did not reach the requested tolerance.

    The best available estimate and its error bound are kept on the
    exception so callers can decide whether to use them anyway.
    """

    def __init__(self, message, value=None, err=None):
        super().__init__(message)
        self.value = value
        self.err = err


class LimitError(DPMeansError):
    """An extrapolated limit sequence failed to settle."""

    def __init__(self, message, value=None, err=None):
        super().__init__(message)
        self.value = value
        self.err = err


class SingularInputError(DPMeansError):
    """The integrand sits on a branch point for a set of positive mass."""


class IndeterminateError(DPMeansError):
    """A divergence test could not decide either way."""


class MeasureError(DPMeansError, ValueError):
    """Invalid parameter measure or measure-definition file."""


class DegenerateMeasureError(DPMeansError, ValueError):
    """The measure puts all its mass on one point."""


class BoundaryError(DPMeansError, ValueError):
    """Evaluation requested too close to the edge of the support hull."""


class ConvergenceError(DPMeansError):
    """An outer iteration (truncation level, series) did not converge."""

    def __init__(self, message, iterates=()):
        super().__init__(message)
        self.iterates = tuple(iterates)
