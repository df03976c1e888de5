class IrsMecError(ValueError):
    """Base class for all errors raised by irsmec."""


class EmptyDeviceList(IrsMecError):
    pass


class NonPositiveParameter(IrsMecError):
    def __init__(self, field, value=None):
        self.field = field
        self.value = value
        super().__init__(f"{field} must be positive (got {value!r})")


class NonPositiveDistance(IrsMecError):
    pass


class DimensionMismatch(IrsMecError):
    pass


class EmptySubset(IrsMecError):
    pass


class EmptyProfile(IrsMecError):
    pass


class InvalidBudget(IrsMecError):
    pass


class TooLarge(IrsMecError):
    pass
