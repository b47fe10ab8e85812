"""Exception and warning types shared across the package."""


class PssqError(Exception):
    """Base class for all library errors."""


class ValidationError(PssqError, ValueError):
    """Input outside the documented domain of an operation."""


class OutOfRange(ValidationError):
    pass


class MeaninglessRange(ValidationError):
    """Averaged count requested with S > N^c."""


class EvenModulus(ValidationError):
    pass


class InvariantViolation(ValidationError):
    pass


class DegenerateFit(ValidationError):
    pass


class EmptyDirection(ValidationError):
    """Monomial optimisation with no descending term and Z1 = 0 (no minimiser)."""


class AmbiguousFloor(PssqError):
    """Approximate-mode evaluation too close to an integer boundary; use exact mode."""


class ResourceLimit(PssqError):
    pass


class FactorizationLimit(ResourceLimit):
    pass


class DegenerateExponent(UserWarning):
    """Main-term formula evaluated outside 1 < c < 2."""


class PrecisionLoss(UserWarning):
    """An argument came within 1e-10 of an integer."""
