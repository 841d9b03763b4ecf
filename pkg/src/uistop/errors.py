"""Exception and warning types shared across the package."""


class DomainError(ValueError):
    """An argument lies outside the domain of the operation."""


class AssumptionViolated(DomainError):
    """The wage drift is not below the effective discount rate (mu >= r_tilde).

    Past this boundary the expected discounted final wage diverges and the
    model has no economic meaning.
    """


class DegenerateSigma(DomainError):
    """Zero volatility was passed to a routine that needs sigma > 0.

    Use the deterministic path (:func:`uistop.model.deterministic_threshold`).
    """


class TruncationWarning(UserWarning):
    """A simulation horizon is too short to make the truncation bias negligible."""

    def __init__(self, message, bias_bound):
        super().__init__(message)
        self.bias_bound = bias_bound
