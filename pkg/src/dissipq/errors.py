"""Exception hierarchy shared by all dissipq modules."""


class DissipqError(Exception):
    """Base class for every error raised by the package."""


class NetlistError(DissipqError):
    pass


class NetlistSyntaxError(NetlistError):
    def __init__(self, message, line=None, column=None):
        self.line = line
        self.column = column
        where = ""
        if line is not None:
            where = f" (line {line}" + (f", column {column})" if column is not None else ")")
        super().__init__(message + where)
        self.message = message


class DuplicateName(NetlistError):
    pass


class DanglingReference(NetlistError):
    pass


class NonPositiveValue(NetlistError):
    pass


class UnsupportedUnit(NetlistError):
    pass


class NonPositiveRealPart(DissipqError):
    pass


class GridTooCoarse(DissipqError):
    pass


class DomainError(DissipqError):
    pass


class TransmissionOutOfRange(DissipqError):
    pass


class UnsupportedTopology(DissipqError):
    pass


class WeakCouplingViolated(DissipqError):
    pass


class SingularTransform(DissipqError):
    pass


class SingularBlock(DissipqError):
    pass


class UnsupportedRegime(DissipqError):
    pass


class NegativeRate(DissipqError):
    pass


class StepSizeUnderflow(DissipqError):
    pass


class InvariantBreach(DissipqError):
    pass


class DegenerateKernel(DissipqError):
    """Raised by :func:`dissipq.lindblad.steady_state` when ``strict=True``."""

    def __init__(self, dimension, basis=None):
        self.dimension = dimension
        self.basis = basis
        super().__init__(f"generator kernel has dimension {dimension}")


class DimensionTooLarge(DissipqError):
    pass


class CutoffTooLow(DissipqError):
    pass


class NonPositiveSample(DissipqError):
    pass
