"""Exception hierarchy for lueq."""


class LueqError(Exception):
    """Base class for all lueq errors."""


class NonFinite(LueqError, ValueError):
    pass


class NonSquare(LueqError, ValueError):
    pass


class NonHermitian(LueqError, ValueError):
    pass


class StateValidationError(LueqError, ValueError):
    """A raw matrix or vector does not describe a valid quantum state."""


class NotHermitian(StateValidationError):
    pass


class NotUnitTrace(StateValidationError):
    pass


class NotPositive(StateValidationError):
    pass


class NotNormalized(StateValidationError):
    pass


class DimensionMismatch(StateValidationError):
    pass


class ResidualImaginary(LueqError, ArithmeticError):
    """A quantity that must be real came out with a sizeable imaginary part."""


class TooManyOrderings(LueqError):
    pass


class WitnessNotFound(LueqError):
    pass


class GenerationFailed(LueqError):
    pass
