"""Exception hierarchy shared by every module of the package."""


class EsdError(Exception):
    """Base class for all errors raised by esdist."""


class InputError(EsdError, ValueError):
    """Bad input data or arguments (CLI exit status 2)."""


class NumericalError(EsdError, ArithmeticError):
    """A numerical routine failed (CLI exit status 3)."""


class MalformedInput(InputError):
    pass


class DuplicateParameter(InputError):
    pass


class ZeroLengthCurve(InputError):
    pass


class NoCommonPartitionNeeded(EsdError):
    """Informational: 1-d open curves keep their own partitions."""


class NotPeriodic(InputError):
    pass


class NonUniformPartition(InputError):
    pass


class PartitionMismatch(InputError):
    pass


class LengthMismatch(InputError):
    pass


class NonPositiveWeights(InputError):
    pass


class ItopTooLarge(InputError):
    pass


class WrongCase(InputError):
    pass


class NotClosed(InputError):
    pass


class EmptyGrid(InputError):
    pass


class BrokenPointerChain(NumericalError):
    pass


class SvdFailure(NumericalError):
    pass
