"""Exception types shared across the package."""


class OrderMismatch(ValueError):
    """Two jets of different truncation order were combined."""


class DomainError(ValueError):
    """An argument lies outside the domain of the requested operation."""


class JetOverflow(ArithmeticError):
    """A jet operation produced a non-finite entry."""


class PreconditionError(ValueError):
    """A caller-guaranteed precondition turned out to be false."""


class NotInFamily(ValueError):
    """An operator does not belong to the characterized family at a point."""


class RankDeficient(ValueError):
    """A least-squares design matrix does not have full column rank."""
