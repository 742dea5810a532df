"""Exception hierarchy shared by all rule generators and drivers."""


class CutQuadError(Exception):
    """Base class for every error raised by this package."""


class ParameterError(CutQuadError, ValueError):
    pass


class EvaluationError(CutQuadError, ArithmeticError):
    """A field evaluated to a non-finite value."""

    def __init__(self, message, point=None):
        super().__init__(message)
        self.point = point


class DegenerateGeometryError(CutQuadError, ValueError):
    pass


class GeometryError(CutQuadError, ValueError):
    """Malformed boundary description (open chain, wrong orientation, ...)."""


class DegenerateNormalError(CutQuadError, ArithmeticError):
    pass


class NumericRangeError(CutQuadError, OverflowError):
    pass


class ResourceError(CutQuadError, RuntimeError):
    pass


class MethodFailure(CutQuadError, RuntimeError):
    """A rule generator could not produce a rule for the given cell."""

    def __init__(self, message, cell=None):
        super().__init__(message)
        self.cell = cell


class UnsupportedCaseError(CutQuadError, ValueError):
    pass


class InsufficientDataError(CutQuadError, ValueError):
    pass
