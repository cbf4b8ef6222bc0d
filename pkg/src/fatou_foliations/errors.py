"""Exception hierarchy shared by all modules."""


class FatouError(Exception):
    """Base class for every error raised by this package."""


class ChartUndefined(FatouError, ValueError):
    """The requested affine chart does not contain the point."""


class InvalidFoliation(FatouError, ValueError):
    pass


class DegenerateChartModel(FatouError, ValueError):
    pass


class NotSingular(FatouError, ValueError):
    pass


class FormSingular(FatouError, ValueError):
    """A transverse form was evaluated on its singular locus."""


class InvalidForm(FatouError, ValueError):
    pass


class HolonomyUndefined(FatouError, ValueError):
    pass


class PathThroughSingularity(HolonomyUndefined):
    pass


class ToleranceNotMet(FatouError, RuntimeError):
    pass


class EmptyRegion(FatouError, ValueError):
    pass


class IndexTooSmall(FatouError, ValueError):
    pass


class NotOnBoundary(FatouError, ValueError):
    pass


class SingularPoint(FatouError, ValueError):
    pass


class MixedBoundary(FatouError, ValueError):
    """The boundary of K_n is neither everywhere tangent nor everywhere transversal."""


class EmptySample(FatouError, ValueError):
    pass


class InvalidConstants(FatouError, ValueError):
    pass


class NotIsometric(FatouError, ValueError):
    pass


class AmbientMismatch(FatouError, ValueError):
    pass


class UnclassifiedAlpha(FatouError, ValueError):
    pass


class NotClosed(FatouError, ValueError):
    """The meromorphic form fails d(omega) = 0.

    ``residual`` is the value of d/dx(1/P) - d/dy(1/Q) at ``point``.
    """

    def __init__(self, message, residual=0.0, point=None, symbolic=None):
        super().__init__(message)
        self.residual = residual
        self.point = point
        self.symbolic = symbolic


class ConfigError(FatouError, ValueError):
    pass


class ResolutionTooLarge(FatouError, ValueError):
    pass
