"""Exception hierarchy shared by all modules."""


class WeakOscError(Exception):
    """Base class for every error raised by the library."""


class ValidationFailure(WeakOscError, ValueError):
    pass


class NotHermitian(ValidationFailure):
    pass


class NotPositive(ValidationFailure):
    def __init__(self, message, min_eigenvalue=None):
        super().__init__(message)
        self.min_eigenvalue = min_eigenvalue


class TraceNotOne(ValidationFailure):
    pass


class DimensionMismatch(ValidationFailure):
    pass


class NotNormalized(ValidationFailure):
    pass


class NumericalFailure(WeakOscError, ArithmeticError):
    """Poles, overflows and vanishing post-selection."""


class DegenerateFrequencies(NumericalFailure):
    pass


class NonFiniteSample(NumericalFailure):
    pass


class OrthogonalPostselection(NumericalFailure):
    pass


class PoleOnPath(NumericalFailure):
    pass


class PoleAtPhase(NumericalFailure):
    pass


class VanishingAmplitude(NumericalFailure):
    pass


class GridOverflow(NumericalFailure):
    pass


class NoSurvivors(NumericalFailure):
    pass


class InsufficientSamples(WeakOscError, ValueError):
    pass
