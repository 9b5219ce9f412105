"""Exception types shared across the package."""


class ConfigInvalid(ValueError):
    pass


class NumericalDivergence(RuntimeError):
    pass


class EmptyProfile(ValueError):
    pass


class IoFailure(OSError):
    pass


class SchemaMismatch(ValueError):
    pass


class ParseFailure(ValueError):
    def __init__(self, message, row=None, column=None):
        super().__init__(message)
        self.row = row
        self.column = column


class MissingColumn(KeyError):
    pass


class DimensionMismatch(ValueError):
    pass


class ShapeMismatch(DimensionMismatch):
    pass


class NonFiniteLoss(ArithmeticError):
    pass


class TooFewRows(ValueError):
    pass


class InvalidHallCode(ValueError):
    """Hall code (0,0,0) or (1,1,1): no sector maps to it, so a sensor has failed."""


class ShootThrough(ValueError):
    pass
