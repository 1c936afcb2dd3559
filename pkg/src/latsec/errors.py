"""Exception hierarchy shared by all latsec modules."""


class LatsecError(Exception):
    """Base class for library errors."""


class DomainError(LatsecError, ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class InvalidLatticeError(DomainError):
    """Basis columns are dependent or the basis is malformed."""


class InvalidSublatticeError(DomainError):
    pass


class UnsupportedRankError(DomainError):
    """Operation needs a full-rank lattice."""


class ShapeError(DomainError):
    pass


class NotFullDiversityError(DomainError):
    """An enumerated lattice vector has a zero component."""


class GenerationFailedError(LatsecError):
    pass


class NumericError(LatsecError, ArithmeticError):
    pass


class BudgetExceededError(LatsecError, RuntimeError):
    """Enumeration would visit more points than the configured cap."""


class MalformedInputError(InvalidLatticeError):
    """JSON input does not follow the documented schema."""
