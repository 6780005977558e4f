"""Exception hierarchy shared by all modules.

The CLI reports ``type(exc).__name__`` on stderr and exits with status 1
for any subclass of :class:`WalkError`.
"""


class WalkError(Exception):
    """Base class for domain errors."""


class InvalidParamsError(WalkError, ValueError):
    pass


class DimensionError(WalkError, ValueError):
    pass


class NonConvergenceError(WalkError, RuntimeError):
    def __init__(self, message, stalled_index=None):
        super().__init__(message)
        self.stalled_index = stalled_index


class InsufficientSamplingError(WalkError, ValueError):
    pass


class MalformedContourError(WalkError, ValueError):
    pass


class DegenerateStateError(WalkError, ValueError):
    pass


class DegenerateDispersionError(WalkError, ValueError):
    pass


class AmbiguousClassificationError(WalkError, ValueError):
    def __init__(self, message, energy=None):
        super().__init__(message)
        self.energy = energy


class SingularInputError(WalkError, ValueError):
    pass


class ExceptionalPointError(WalkError, ArithmeticError):
    pass


class CoalescenceError(ExceptionalPointError):
    pass


class GridError(WalkError, ValueError):
    pass


class InsufficientStatisticsError(WalkError, ValueError):
    pass
