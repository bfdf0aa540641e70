"""Exception hierarchy shared by all modules."""


class BesselZetaError(Exception):
    """Base class for errors raised by this package."""


class DomainError(BesselZetaError, ValueError):
    """An argument lies outside the domain of the requested function."""


class PoleError(DomainError):
    """Evaluation was requested at (or too close to) a pole."""


class NumericError(BesselZetaError, ArithmeticError):
    """An iterative or series computation failed to reach its target.

    ``diagnostics`` carries whatever state is useful for a post-mortem
    (iteration counts, residuals, offending indices).
    """

    def __init__(self, message, **diagnostics):
        super().__init__(message)
        self.diagnostics = diagnostics


class BudgetExceededError(NumericError):
    """The requested accuracy cannot be certified within the work budget."""

    def __init__(self, message, achievable=None, **diagnostics):
        super().__init__(message, achievable=achievable, **diagnostics)
        self.achievable = achievable


class ConditioningError(NumericError):
    """A least-squares design matrix is too ill-conditioned to trust."""


class HypothesisError(NumericError):
    """A hypothesis of the product comparison failed its numerical check."""


class NearPoleError(PoleError):
    """A continuation was requested too close to a pole; use a residue extractor."""

    def __init__(self, message, pole=None):
        super().__init__(message)
        self.pole = pole
