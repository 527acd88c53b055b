"""Exception hierarchy shared by all modules."""


class QBatteryError(Exception):
    """Base class for package errors."""


class InvalidArgumentError(QBatteryError, ValueError):
    """An argument is outside its admissible range."""


class ValidityDomainError(QBatteryError, ValueError):
    """Parameters fall outside the regime where a closed form applies."""


class InstabilityError(ValidityDomainError):
    """Coupling exceeds the stability bound of the oscillator pair."""


class NumericalIntegrityError(QBatteryError, ArithmeticError):
    """A numerical object violates a structural invariant (Hermiticity, finiteness)."""


class ResourceError(QBatteryError, RuntimeError):
    """A truncated Hilbert space would exceed the configured dimension cap."""
