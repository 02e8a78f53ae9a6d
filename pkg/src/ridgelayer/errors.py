"""Exception types shared across the package."""


class RidgeLayerError(Exception):
    """Base class for all errors raised by ridgelayer."""


class ContractViolation(RidgeLayerError, ValueError):
    """Inputs violate a shape or precondition contract."""


class FormatError(RidgeLayerError):
    """A tensor file could not be decoded.

    ``offset`` is the byte offset at which decoding failed.
    """

    def __init__(self, message, offset=0):
        super().__init__(f"{message} (at byte offset {offset})")
        self.offset = offset


class SingularSystem(RidgeLayerError, ArithmeticError):
    """The linear system is not symmetric positive definite."""


class EmptyProblem(ContractViolation):
    """A regression problem with zero samples or zero features."""


class InvalidConfig(ContractViolation):
    """A configuration value is outside its allowed range."""
