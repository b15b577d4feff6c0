"""Exception hierarchy for hallcert.

Every error is a ValueError subclass so callers that only care about bad
input can keep catching ValueError.
"""

from typing import Optional


class HallCertError(ValueError):
    """Base class for all hallcert errors."""


class NotPrime(HallCertError):
    pass


class DegreeZero(HallCertError):
    pass


class DivisionByZero(HallCertError):
    pass


class FieldMismatch(HallCertError):
    pass


class Singular(HallCertError):
    pass


class DimensionMismatch(HallCertError):
    pass


class InconsistentTypeParameters(HallCertError):
    pass


class UnsupportedFamily(HallCertError):
    pass


class EvenCharacteristicOrthogonal(UnsupportedFamily):
    pass


class BudgetExceeded(HallCertError):
    """Raised when an enumeration or search runs past its budget."""

    def __init__(self, message: str, partial: Optional[int] = None):
        super().__init__(message)
        self.partial = partial


class NonInvertibleGenerator(HallCertError):
    pass


class IndexOutOfRange(HallCertError):
    pass


class ParentMismatch(HallCertError):
    pass


class NotCoprime(HallCertError):
    pass


class EvenBaseForRTwo(HallCertError):
    pass


class InvalidDecomposition(HallCertError):
    pass


class DimensionTooSmall(HallCertError):
    pass


class PiContainsP(HallCertError):
    pass


class EmptyPi(HallCertError):
    pass


class NoCandidateClause(HallCertError):
    pass


class KindDimensionMismatch(HallCertError):
    pass


class WitnessNotInGroup(HallCertError):
    pass


class IntermediateNotAbelian(HallCertError):
    pass


class ReplayMismatch(HallCertError):
    pass
