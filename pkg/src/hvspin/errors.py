"""Exception types raised across the package."""


class DomainError(ValueError):
    """An argument lies outside the domain of a formula (e.g. cos(theta) > 1)."""


class InvalidModelParameter(ValueError):
    pass


class UnsupportedModelError(ValueError):
    """The requested quantity is not defined for the given model."""


class EmptyRunError(ValueError):
    pass


class InsufficientDataError(ValueError):
    """A conditioning cell of a tally has no trials in it."""


class ExactLawViolation(RuntimeError):
    """A per-trial identity that must hold exactly was broken during a run."""
