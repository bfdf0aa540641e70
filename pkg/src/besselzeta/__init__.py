"""Zeta invariants of the Bessel operator L_nu + q^2 on (0, l].

Modules:

* ``specfun``: Bessel zeros, log-scaled modified Bessel functions, Hurwitz zeta
* ``heat_trace``: heat trace and its small-t coefficients
* ``zeta_core``: z(s), resolvent trace, poles, z(0), z'(0), determinant
* ``regprod``: regularized products by comparison with a Hurwitz base
* ``mellin_oracle``: independent continuation of z(s) from the heat trace
* ``cli``: command-line front end
"""

from .errors import (
    BesselZetaError,
    BudgetExceededError,
    ConditioningError,
    DomainError,
    HypothesisError,
    NearPoleError,
    NumericError,
    PoleError,
)
from .heat_trace import OperatorParams

__version__ = "0.1.0"

__all__ = [
    "OperatorParams",
    "BesselZetaError",
    "BudgetExceededError",
    "ConditioningError",
    "DomainError",
    "HypothesisError",
    "NearPoleError",
    "NumericError",
    "PoleError",
]
