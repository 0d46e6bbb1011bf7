"""Exception hierarchy shared by all omegahunt modules."""


class OmegaHuntError(Exception):
    """Base class for all errors raised by this package."""


class DomainError(OmegaHuntError, ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class SizeError(OmegaHuntError, ValueError):
    """A requested allocation or enumeration exceeds the configured budget."""


class RangeError(OmegaHuntError, ValueError):
    """A table or scan range is too small for the requested computation."""


class AccuracyError(OmegaHuntError, ArithmeticError):
    """A numerical routine could not reach its accuracy target."""


class HypothesisError(OmegaHuntError, ValueError):
    """A structural hypothesis (e.g. the kernel sector property) is violated.

    Distinct from :class:`AccuracyError`: the inputs are invalid for the
    statement being certified, the numerics are fine.
    """


class ValidationError(OmegaHuntError, ValueError):
    """A record failed revalidation against its defining quantities."""


class StoreError(OmegaHuntError, OSError):
    """Persistent record storage failed."""
