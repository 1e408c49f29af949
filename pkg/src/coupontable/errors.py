"""Exception hierarchy. Each class carries the CLI exit code it maps to."""


class CouponTableError(Exception):
    exit_code = 1


class ValidationError(CouponTableError, ValueError):
    exit_code = 2


class MarginOutOfRange(ValidationError):
    pass


class DimensionError(ValidationError):
    pass


class CellOutOfRange(ValidationError):
    pass


class MarginSumError(ValidationError):
    pass


class DomainError(ValidationError):
    pass


class SpecError(ValidationError):
    pass


class EmptyInput(ValidationError):
    pass


class ResourceLimit(CouponTableError):
    exit_code = 3


class NoConvergence(CouponTableError):
    exit_code = 4

    def __init__(self, message, trace=None):
        super().__init__(message)
        self.trace = trace or []


class Unclassifiable(NoConvergence):
    pass
