"""Exception types shared across the package."""


class ValidationError(ValueError):
    """A scenario or input file fails its consistency checks."""


class DomainError(ValueError):
    """An operation was called outside its mathematical domain."""


class UnstableEstimateError(RuntimeError):
    """A derived statistic is too noisy to report (e.g. a ratio whose
    denominator is within a few standard errors of zero)."""
