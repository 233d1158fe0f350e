"""Exception hierarchy shared by every module of the package."""


class SumsetLabError(Exception):
    """Base class for all errors raised by sumset_lab."""


class InvalidGroupError(SumsetLabError, ValueError):
    pass


class InvalidElementError(SumsetLabError, ValueError):
    pass


class InvalidInputError(SumsetLabError, ValueError):
    pass


class InvalidSubgroupError(SumsetLabError, ValueError):
    pass


class ShapeError(SumsetLabError, ValueError):
    pass


class CountOverflowError(SumsetLabError, OverflowError):
    """The exact tuple count does not fit the configured integer width."""


class InvalidConditioningError(SumsetLabError, ValueError):
    pass


class InvalidConstructionError(SumsetLabError, ValueError):
    pass


class InvariantViolation(SumsetLabError, RuntimeError):
    """An internal invariant that should be impossible to break was broken."""
