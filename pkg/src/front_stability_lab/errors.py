"""Exception types shared across the package."""


class LabError(Exception):
    """Base class for all package errors."""


class DomainError(LabError, ValueError):
    pass


class ShapeError(LabError, ValueError):
    pass


class PreconditionError(LabError, ValueError):
    pass


class ResolutionError(LabError, ValueError):
    pass


class RangeError(LabError, ValueError):
    pass


class FitError(LabError, ValueError):
    pass


class NumericalError(LabError, RuntimeError):
    """Numerical failures; the CLI maps these to exit code 3."""


class SolverError(NumericalError):
    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class DegenerateFrontError(NumericalError):
    pass


class SimplicityError(NumericalError):
    pass


class EigensolverError(NumericalError):
    pass


class DecompositionError(NumericalError):
    pass


class BlowUpError(NumericalError):
    def __init__(self, message, t_last=None):
        super().__init__(message)
        self.t_last = t_last
