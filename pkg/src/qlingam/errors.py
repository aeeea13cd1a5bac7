"""Exception hierarchy.

Every error raised by the toolkit derives from :class:`QLingamError` and
belongs to one of three families, which the CLI maps onto exit codes:
validation (2), data (3) and numerical (4).
"""


class QLingamError(Exception):
    exit_code = 1


class ValidationError(QLingamError, ValueError):
    exit_code = 2


class DataError(QLingamError, ValueError):
    exit_code = 3


class NumericalError(QLingamError, ArithmeticError):
    exit_code = 4


class UnknownVariable(ValidationError):
    def __init__(self, name):
        super().__init__(f"unknown variable: {name!r}")
        self.name = name


class KTooLarge(ValidationError):
    pass


class ZeroShots(ValidationError):
    pass


class DimensionMismatch(ValidationError):
    pass


class HeaderMissing(DataError):
    pass


class NoRowsRemaining(DataError):
    pass


class ConstantSeries(DataError):
    pass


class ConstantRegressor(DataError):
    pass


class IllConditioned(NumericalError):
    pass


class SingularCalibration(NumericalError):
    pass


class SingularDesign(NumericalError):
    pass
