"""Exception and warning types raised across dephasim."""


class DephasimError(Exception):
    """Base class for all dephasim errors."""


class DimensionMismatch(DephasimError, ValueError):
    pass


class NotHermitian(DephasimError, ValueError):
    pass


class TruncationError(DephasimError):
    """Fock cutoff too small for the requested state or operator."""


class DegenerateState(DephasimError):
    """Superposition cancels to (numerically) zero norm."""


class BracketError(DephasimError):
    pass


class PositivityViolation(DephasimError):
    pass


class KrausTruncationError(DephasimError):
    pass


class QuadratureError(DephasimError):
    pass


class NormalizationError(DephasimError):
    pass


class ZeroInformation(DephasimError):
    pass


class NumericalFailure(DephasimError):
    pass


class StepTooLarge(DephasimError):
    pass


class ZeroSlope(DephasimError):
    pass


class ConfigError(DephasimError, ValueError):
    pass


class TruncationWarning(UserWarning):
    pass


class DegenerateSpectrum(UserWarning):
    pass
