"""Exception types shared by all modules."""


class KinkCollideError(Exception):
    pass


class InvalidArgument(KinkCollideError, ValueError):
    pass


class NumericFailure(KinkCollideError, RuntimeError):
    pass


class AlgebraError(KinkCollideError, ValueError):
    pass


class TruncationError(KinkCollideError, ValueError):
    pass


class UndefinedValuation(KinkCollideError, ValueError):
    pass


class InterpolationError(KinkCollideError, ValueError):
    pass


class InstabilityError(KinkCollideError, RuntimeError):
    pass
