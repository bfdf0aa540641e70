"""The spectral zeta function z(s) of L_nu + q^2 and its invariants.

    z(s, nu, q, l) = sum_n (j_{nu,n}^2 / l^2 + q^2)^{-s},   Re s > 1/2,

continued meromorphically with simple poles at s = 1/2, -1/2, -3/2, ... .
The Bessel zeta function zeta_RB(s, nu, a) = sum_n (j_{nu,n}^2/pi^2 + a^2)^{-s/2}
is z(s/2, nu, a, pi).

Closed forms used here:

* residue at s = 1/2 - k: a_{2k} / Gamma(1/2 - k),
* z(0) = -A with A = (nu + 1/2)/2,
* z'(0) = -B + T(0) with
  T(lambda) = nu ln(l z) - ln I_nu(l z) - ln(2^nu Gamma(nu+1)), z = sqrt(q^2 - lambda),
  B = ln(2 pi)/2 + (nu + 1/2) ln l - ln(2^nu Gamma(nu+1)),
  which collapses to z'(0) = -ln(sqrt(2 pi l) I_nu(l q) / q^nu).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import specfun
from .errors import BudgetExceededError, DomainError
from .heat_trace import OperatorParams, heat_coefficient

__all__ = [
    "TFunctionData",
    "PoleResidue",
    "ZetaInvariants",
    "Determinant",
    "RBInvariants",
    "eigenvalue",
    "zeta_direct",
    "rb_zeta_direct",
    "resolvent_trace",
    "resolvent_trace_direct",
    "t_function",
    "t_function_data",
    "pole_data",
    "zeta_at_zero",
    "zeta_deriv_at_zero",
    "closed_form_invariants",
    "regularized_determinant",
    "rb_invariants",
]

LOG_2PI = math.log(2.0 * math.pi)

# Direct sums stop growing past this many zeros.
MAX_DIRECT_TERMS = 1_000_000


@dataclass(frozen=True)
class TFunctionData:
    """The constants A, B and T(0) of the T-method for L_nu + q^2."""

    A: float
    B: float
    T0: float

    @property
    def value0(self) -> float:
        return -self.A

    @property
    def deriv0(self) -> float:
        return -self.B + self.T0


@dataclass(frozen=True)
class PoleResidue:
    """A simple pole of z (or of zeta_RB) and its residue.

    ``caveat`` is set when the residue depends on heat coefficients a_{2k}
    with k >= 2, whose general formula is not corroborated independently.
    """

    location: float
    residue: float
    k: int
    caveat: str | None = None


@dataclass(frozen=True)
class ZetaInvariants:
    """z(0), z'(0) and det = exp(-z'(0)) as produced by one route."""

    value0: float
    deriv0: float
    route: str
    err: float = 0.0
    extra: dict = field(default_factory=dict, compare=False)

    @property
    def log_det(self) -> float:
        return -self.deriv0

    @property
    def det(self) -> float:
        return math.exp(-self.deriv0)


@dataclass(frozen=True)
class Determinant:
    """Regularized determinant; ``value`` is None when exp(log) overflows."""

    log: float
    value: float | None
    overflow: bool = False


@dataclass(frozen=True)
class RBInvariants:
    poles: list
    value0: float
    deriv0: float


def eigenvalue(params: OperatorParams, n: int) -> float:
    """The n-th eigenvalue j_{nu,n}^2 / l^2 + q^2 of L_nu + q^2."""
    j = specfun.bessel_zero(params.nu, n)
    return (j / params.l) ** 2 + params.q**2


def _sum_over_zeros(nu: float, c2: float, s: float, n: int) -> float:
    j = specfun.zero_table(nu, n)[:n]
    return math.fsum((j * j + c2) ** -s)


def _direct_with_tail(nu, c2, s, accuracy, start, max_terms):
    """sum_n (j_n^2 + c2)^-s with an asymptotic tail; returns (value, err)."""
    # the tail series in c2/beta^2 needs beta well above sqrt(c2)
    n = max(start, int(10.0 * math.sqrt(c2) / math.pi) + 1)
    while True:
        tail, err = specfun.zero_power_tail(nu, c2, s, n)
        if err <= accuracy or n >= max_terms:
            break
        n = min(2 * n, max_terms)
    if err > accuracy:
        raise BudgetExceededError(
            f"tail error {err:.3g} above target {accuracy:.3g} at {n} terms",
            achievable=err, terms=n,
        )
    return _sum_over_zeros(nu, c2, s, n) + tail, err


def zeta_direct(s: float, params: OperatorParams, accuracy: float = 1e-12,
                terms: int = 2000, full_output: bool = False):
    """z(s) for real s > 1/2 by summation over the zeros.

    The first `terms` eigenvalues (more if the tail estimate demands it) are
    summed exactly; the rest are summed in closed form through McMahon's
    expansion of the zeros, which turns the tail into a short combination of
    Hurwitz zeta values.
    """
    if not s > 0.5:
        raise DomainError(f"the defining series diverges for s <= 1/2 (s={s})")
    l2 = params.l**2
    accuracy_scaled = accuracy * l2 ** -s
    value, err = _direct_with_tail(params.nu, l2 * params.q**2, s,
                                   accuracy_scaled, terms, MAX_DIRECT_TERMS)
    value *= l2**s
    err *= l2**s
    return (value, err) if full_output else value


def rb_zeta_direct(s: float, nu: float, a: float, **kwargs):
    """zeta_RB(s, nu, a) = sum_n (j_{nu,n}^2/pi^2 + a^2)^{-s/2}, s > 1."""
    return zeta_direct(0.5 * s, OperatorParams.rb(nu, a), **kwargs)


def _check_left_of_spectrum(lam: float, params: OperatorParams) -> float:
    z2 = params.q**2 - lam
    if not z2 > 0:
        raise DomainError(f"lambda={lam} is not below the spectrum bottom q^2={params.q**2}")
    return math.sqrt(z2)


def resolvent_trace(lam: float, params: OperatorParams) -> float:
    """R(lambda) = sum_n 1/(lambda - lambda_n) for real lambda < q^2.

    Closed form nu/(2z^2) - (1/(2z)) d/dz ln I_nu(l z) with z = sqrt(q^2 - lambda).
    Writing d/dx ln I_nu = nu/x + I_{nu+1}/I_nu cancels the first term exactly,
    leaving -l I_{nu+1}(l z) / (2 z I_nu(l z)).
    """
    z = _check_left_of_spectrum(lam, params)
    return -params.l * specfun.bessel_i_ratio(params.nu, params.l * z) / (2.0 * z)


def resolvent_trace_direct(lam: float, params: OperatorParams, terms: int = 10_000,
                           full_output: bool = False):
    """Pole sum -sum_n 1/(z^2 + j_n^2/l^2) over `terms` zeros plus McMahon tail."""
    z = _check_left_of_spectrum(lam, params)
    l2 = params.l**2
    c2 = l2 * z * z
    n = max(terms, int(10.0 * math.sqrt(c2) / math.pi) + 1)
    tail, err = specfun.zero_power_tail(params.nu, c2, 1.0, n)
    value = -l2 * (_sum_over_zeros(params.nu, c2, 1.0, n) + tail)
    return (value, l2 * err) if full_output else value


def t_function(lam: float, params: OperatorParams) -> float:
    """T(lambda) = nu ln(l z) - ln I_nu(l z) - ln(2^nu Gamma(nu+1)), a primitive of -R."""
    nu = params.nu
    if lam > params.q**2:
        raise DomainError(f"lambda={lam} is inside the spectral region")
    z = math.sqrt(params.q**2 - lam)
    x = params.l * z
    # nu ln x - ln I_nu(x) = -ln(I_nu(x)/x^nu)
    return -specfun.log_bessel_i_over_power(nu, x) - nu * math.log(2.0) - math.lgamma(nu + 1.0)


def t_function_data(params: OperatorParams) -> TFunctionData:
    """A, B and T(0) of the T-method (T evaluated at spectral parameter 0)."""
    nu, l = params.nu, params.l
    log_norm = nu * math.log(2.0) + math.lgamma(nu + 1.0)
    A = 0.5 * (nu + 0.5)
    B = 0.5 * LOG_2PI + (nu + 0.5) * math.log(l) - log_norm
    return TFunctionData(A, B, t_function(0.0, params))


def pole_data(k: int, params: OperatorParams, coefficient=heat_coefficient) -> PoleResidue:
    """Pole of z at s = 1/2 - k with residue a_{2k} / Gamma(1/2 - k)."""
    if k < 0:
        raise DomainError("pole index k must be >= 0")
    if k == 0 and coefficient is heat_coefficient:
        # a_0 / Gamma(1/2) = l / (2 pi), without the sqrt(pi) round trip
        residue = params.l / (2.0 * math.pi)
    else:
        residue = coefficient(2 * k, params) / specfun.gamma_neg_half_integer(k)
    caveat = None
    if k >= 2:
        caveat = "residue uses a_{2k} from the general double-sum formula"
    return PoleResidue(0.5 - k, residue, k, caveat)


def zeta_at_zero(params: OperatorParams) -> float:
    """z(0) = -(nu + 1/2)/2, independent of q and l."""
    return -0.5 * (params.nu + 0.5)


def zeta_deriv_at_zero(params: OperatorParams) -> float:
    """z'(0) = -ln(sqrt(2 pi l) I_nu(l q) / q^nu), assembled from logarithms.

    Uses I_nu(lq)/q^nu = l^nu * (I_nu(x)/x^nu) at x = lq so that q -> 0 is
    a regular limit.
    """
    nu, q, l = params.nu, params.q, params.l
    return -(0.5 * math.log(2.0 * math.pi * l) + nu * math.log(l)
             + specfun.log_bessel_i_over_power(nu, l * q))


def closed_form_invariants(params: OperatorParams) -> ZetaInvariants:
    deriv0 = zeta_deriv_at_zero(params)
    err = 8.0 * np.finfo(float).eps * (1.0 + abs(deriv0))
    return ZetaInvariants(zeta_at_zero(params), deriv0, "closed_form", err)


def regularized_determinant(params: OperatorParams) -> Determinant:
    """det(L_nu + q^2) = exp(-z'(0)) = sqrt(2 pi l) I_nu(lq) / q^nu."""
    log_det = -zeta_deriv_at_zero(params)
    try:
        return Determinant(log_det, math.exp(log_det))
    except OverflowError:
        return Determinant(log_det, None, overflow=True)


def rb_invariants(nu: float, a: float, kmax: int = 5) -> RBInvariants:
    """Poles, zeta_RB(0) and zeta_RB'(0) of the Bessel zeta function.

    From zeta_RB(s) = z(s/2, nu, a, pi): poles move to s = 1 - 2k (1, -1, -3,
    ...), residues double, the value at 0 is unchanged and the derivative
    at 0 halves.
    """
    params = OperatorParams.rb(nu, a)
    poles = []
    for k in range(kmax + 1):
        p = pole_data(k, params)
        poles.append(PoleResidue(2.0 * p.location, 2.0 * p.residue, k, p.caveat))
    return RBInvariants(poles, zeta_at_zero(params), 0.5 * zeta_deriv_at_zero(params))
