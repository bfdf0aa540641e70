"""Heat trace of L_nu + q^2 on (0, l] and its small-t expansion.

The heat trace is f(t) = sum_n exp(-t (j_{nu,n}^2 / l^2 + q^2)). For small t

    f(t) ~ sum_i a_i(nu, q, l) t^{(i-1)/2}.

Three independent sources for the coefficients a_i live here:

* the closed forms of the first three coefficients together with the general
  double-sum formulas (``heat_coefficient`` / ``double_sum_coefficient``),
* coefficients derived from the large-argument expansion of ln I_nu, which
  controls the resolvent trace at large spectral parameter
  (``asymptotic_coefficient``),
* a weighted least-squares fit to spectrally summed heat-trace values
  (``fit_heat_coefficients``).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import special

from . import specfun
from .errors import BudgetExceededError, ConditioningError, DomainError

__all__ = [
    "OperatorParams",
    "HeatExpansion",
    "heat_coefficient",
    "double_sum_coefficient",
    "asymptotic_coefficient",
    "heat_trace",
    "heat_trace_tail_bound",
    "fit_heat_coefficients",
    "DEFAULT_FIT_ORDER",
]

SQRT_PI = math.sqrt(math.pi)

# Default number of zeros a heat-trace evaluation may consume before giving up.
MAX_ZEROS = 2_000_000

# Fit order that reaches the rounding-noise floor on t in [1e-4, 1e-1] for
# l = pi; see tests/test_heat_trace.py.
DEFAULT_FIT_ORDER = 11
MAX_FIT_CONDITION = 1e12

# Relative error of a spectrally summed heat-trace value (two ulps); used as
# a floor for the residual variance of coefficient fits.
DATA_RELATIVE_ERROR = 2.0 * np.finfo(float).eps


@dataclass(frozen=True)
class OperatorParams:
    """Order nu, mass shift q and interval length l of L_nu + q^2 on (0, l].

    ``q = 0`` is accepted as the documented massless limit: every closed form
    is polynomial or continuous in q^2 there.
    """

    nu: float
    q: float
    l: float

    def __post_init__(self):
        for name in ("nu", "q", "l"):
            value = getattr(self, name)
            if not math.isfinite(value):
                raise DomainError(f"{name} must be finite, got {value!r}")
        if self.nu < 0:
            raise DomainError(f"nu must be >= 0, got {self.nu}")
        if self.q < 0:
            raise DomainError(f"q must be >= 0, got {self.q}")
        if not self.l > 0:
            raise DomainError(f"l must be > 0, got {self.l}")

    @classmethod
    def rb(cls, nu: float, a: float) -> "OperatorParams":
        """Parameters whose zeta function is zeta_RB(2s, nu, a): l = pi, q = a."""
        return cls(nu, a, math.pi)

    @property
    def u(self) -> float:
        """Offset (nu - 1/2)/2 of the comparison sequence pi^2 (n + u)^2 / l^2."""
        return 0.5 * (self.nu - 0.5)

    def as_dict(self) -> dict:
        return {"nu": self.nu, "q": self.q, "l": self.l}


@dataclass(frozen=True)
class HeatExpansion:
    """Coefficients a_0 ... a_I of the small-t heat-trace expansion.

    ``source`` names where the coefficients came from ("closed_form",
    "asymptotic" or "fit"); ``stderr`` is only set for fitted expansions.
    """

    params: OperatorParams
    coeffs: tuple
    source: str = "closed_form"
    stderr: tuple | None = None
    condition: float | None = None

    @property
    def order(self) -> int:
        return len(self.coeffs) - 1

    def __getitem__(self, i):
        return self.coeffs[i]

    def evaluate(self, t, order: int | None = None):
        """Partial sum sum_{i<=order} a_i t^{(i-1)/2}."""
        order = self.order if order is None else order
        t = np.asarray(t, dtype=float)
        return sum(self.coeffs[i] * t ** (0.5 * (i - 1)) for i in range(order + 1))


# ---------------------------------------------------------------------------
# Coefficients
# ---------------------------------------------------------------------------


def _double_sum(i_total: int, params: OperatorParams) -> float:
    """sum over j >= 0, k >= 1 with k + 2j = i_total of the Gamma-ratio terms."""
    nu, q, l = params.nu, params.q, params.l
    terms = []
    for j in range(i_total // 2 + 1):
        k = i_total - 2 * j
        if k < 1:
            continue
        terms.append(
            (-1) ** (j + k) / (2**k * math.factorial(j) * math.factorial(k))
            * q ** (2 * j) / (l**k * special.gamma(0.5 * k))
            * specfun.gamma_ratio(nu, k)
        )
    return math.fsum(terms)


def double_sum_coefficient(i: int, params: OperatorParams) -> float:
    """a_i from the general even/odd double-sum formulas, exactly as printed.

    At i = 1 this gives -(nu - 1/2)/2, which disagrees with the constant term
    -(nu + 1/2)/2 of the explicit expansion; ``heat_coefficient`` therefore
    only uses this function for i >= 3.
    """
    if i < 0:
        raise DomainError("coefficient index must be >= 0")
    nu, q, l = params.nu, params.q, params.l
    half = i // 2
    if i % 2 == 0:
        lead = (-1) ** half / math.factorial(half) * l * q ** (2 * half) / (2.0 * SQRT_PI)
        return lead - _double_sum(i - 1, params)
    lead = (-1) ** (half + 1) * (nu - 0.5) * q ** (2 * half) / (2.0 * math.factorial(half))
    return lead - _double_sum(i - 1, params)


def heat_coefficient(i: int, params: OperatorParams) -> float:
    """Heat-trace coefficient a_i(nu, q, l).

    The first three are the explicit values l/(2 sqrt(pi)), -(nu + 1/2)/2 and
    (nu^2 - 1/4 - l^2 q^2)/(2 l sqrt(pi)); higher ones come from the general
    double-sum formulas (``double_sum_coefficient``).
    """
    nu, q, l = params.nu, params.q, params.l
    if i == 0:
        return l / (2.0 * SQRT_PI)
    if i == 1:
        return -0.5 * (nu + 0.5)
    if i == 2:
        return (nu * nu - 0.25 - l * l * q * q) / (2.0 * l * SQRT_PI)
    return double_sum_coefficient(i, params)


def _massless_unit_coefficients(nu: float, order: int) -> np.ndarray:
    """Heat coefficients of sum_n exp(-t j_{nu,n}^2), from the Hankel expansion.

    ln I_nu(x) ~ x - ln(2 pi x)/2 + ln(1 + sum_k (-1)^k h_k x^-k) with
    h_k = Gamma(nu+k+1/2) / (Gamma(nu-k+1/2) 2^k k!). The coefficient of
    z^{-(m+1)} in minus the resolvent trace becomes b_m Gamma((m+1)/2).
    """
    p = [1.0]
    for k in range(1, order + 1):
        p.append((-1) ** k * specfun.gamma_ratio(nu, k) / (2**k * math.factorial(k)))
    log_p = specfun._series_log(np.array(p), order)
    out = np.empty(order + 1)
    for m in range(order + 1):
        if m == 0:
            c = 0.5
        elif m == 1:
            c = -0.5 * (nu + 0.5)
        else:
            c = -0.5 * (m - 1) * log_p[m - 1]
        out[m] = c / special.gamma(0.5 * (m + 1))
    return out


def _shift_by_mass(b, q: float):
    """Coefficients of exp(-t q^2) sum_i b_i t^{(i-1)/2}, plus the linear map used."""
    n = len(b)
    M = np.zeros((n, n))
    for i in range(n):
        for j in range(i // 2 + 1):
            M[i, i - 2 * j] = (-q * q) ** j / math.factorial(j)
    return M @ np.asarray(b, dtype=float), M


def asymptotic_coefficient(i: int, params: OperatorParams) -> float:
    """a_i derived from the large-argument expansion of ln I_nu.

    Unlike the double-sum formulas this keeps the nonlinearity of the
    logarithm, so it is exact to all orders of the asymptotic series.
    """
    if i < 0:
        raise DomainError("coefficient index must be >= 0")
    b = _massless_unit_coefficients(params.nu, i)
    b *= params.l ** (1.0 - np.arange(i + 1))
    a, _ = _shift_by_mass(b, params.q)
    return float(a[i])


# ---------------------------------------------------------------------------
# Spectral summation
# ---------------------------------------------------------------------------


def heat_trace_tail_bound(t: float, params: OperatorParams, table, n: int) -> float:
    """Upper bound on sum_{m > n} exp(-t (j_m^2/l^2 + q^2)).

    Zero spacings are monotone in n and tend to pi, so for m > n
    j_m >= j_n + (m - n) s with s = min(pi, j_n - j_{n-1}); the Gaussian sum
    is then dominated by its integral.
    """
    l = params.l
    jn = table[n - 1]
    spacing = math.pi if n < 2 else min(math.pi, jn - table[n - 2])
    rt = math.sqrt(t)
    bound = l / (spacing * rt) * 0.5 * SQRT_PI * math.erfc(rt * jn / l)
    return bound * math.exp(-t * params.q**2)


def _zeros_needed(t: float, params: OperatorParams, accuracy: float) -> int:
    # erfc(x) <= exp(-x^2): ask for x^2 >= ln(prefactor / accuracy)
    pref = params.l / (2.9 * math.sqrt(t)) * SQRT_PI
    x2 = max(math.log(max(pref / accuracy, 2.0)), 1.0)
    jmax = params.l * math.sqrt(x2 / t)
    return int(jmax / math.pi + 0.5 * params.nu + 4)


def _heat_trace_scalar(t, params, accuracy, max_zeros):
    if not t > 0:
        raise DomainError(f"heat_trace requires t > 0, got {t!r}")
    need = _zeros_needed(t, params, accuracy)
    if need > max_zeros:
        table = specfun.zero_table(params.nu, max_zeros)
        achievable = heat_trace_tail_bound(t, params, table, max_zeros)
        raise BudgetExceededError(
            f"heat trace at t={t:g} needs ~{need} zeros (budget {max_zeros})",
            achievable=achievable, t=t,
        )
    table = specfun.zero_table(params.nu, need)
    n = need
    while heat_trace_tail_bound(t, params, table, n) > accuracy:
        n = min(2 * n, max_zeros)
        table = specfun.zero_table(params.nu, n)
        if n == max_zeros:
            raise BudgetExceededError(
                "heat trace tail bound not met within budget",
                achievable=heat_trace_tail_bound(t, params, table, n), t=t,
            )
    lam = table[:n] / params.l
    return math.exp(-t * params.q**2) * math.fsum(np.exp(-t * lam * lam))


def heat_trace(t, params: OperatorParams, accuracy: float = 1e-15,
               max_zeros: int = MAX_ZEROS):
    """Heat trace sum_n exp(-t (j_{nu,n}^2/l^2 + q^2)).

    The truncation point is chosen so that ``heat_trace_tail_bound`` certifies
    an absolute truncation error of at most `accuracy`. Terms are summed with
    ``math.fsum`` in index order, so results are reproducible bit for bit.

    Accepts a scalar or an array of times.
    """
    if np.ndim(t) == 0:
        return _heat_trace_scalar(float(t), params, accuracy, max_zeros)
    t = np.asarray(t, dtype=float)
    return np.array([_heat_trace_scalar(float(ti), params, accuracy, max_zeros)
                     for ti in t.ravel()]).reshape(t.shape)


# ---------------------------------------------------------------------------
# Fitting
# ---------------------------------------------------------------------------


def fit_heat_coefficients(params: OperatorParams, grid=None,
                          order: int = DEFAULT_FIT_ORDER) -> HeatExpansion:
    """Fit a_0 ... a_order to spectrally summed heat-trace values.

    The massless factor exp(t q^2) f(t) is fitted against t^{(i-1)/2} by
    least squares with residual weights t^{1/2}; the mass factor exp(-t q^2)
    is then multiplied back in as a power series, which is exact. Standard
    errors come from the residual variance and are propagated through the
    same linear map.

    Raises ConditioningError if the scaled design matrix is too
    ill-conditioned for the requested order.
    """
    if grid is None:
        grid = np.geomspace(1e-4, 1e-1, 200)
    t = np.sort(np.asarray(grid, dtype=float))
    if t[0] <= 0 or t[-1] > 0.5:
        raise DomainError("fit grid must lie within (0, 0.5]")
    if t.size < max(2 * order, order + 2):
        raise DomainError(f"need at least {max(2 * order, order + 2)} grid points for order {order}")

    y = heat_trace(t, params) * np.exp(t * params.q**2)
    w = np.sqrt(t)
    X = np.stack([t ** (0.5 * (i - 1)) for i in range(order + 1)], axis=1) * w[:, None]
    scale = np.linalg.norm(X, axis=0)
    A = X / scale
    Q, R = np.linalg.qr(A)
    sv = np.linalg.svd(R, compute_uv=False)
    cond = float(sv[0] / sv[-1])
    if cond > MAX_FIT_CONDITION:
        raise ConditioningError(
            f"design matrix condition {cond:.3g} too large; try an order below {order}",
            condition=cond, order=order,
        )
    rhs = y * w
    coef = np.linalg.solve(R, Q.T @ rhs)
    # refinement with residuals in extended precision removes the solve's
    # own rounding (of order cond * eps), which would otherwise exceed the
    # statistical error of well-conditioned fits
    A_ext = A.astype(np.longdouble)
    for _ in range(2):
        r_ext = rhs.astype(np.longdouble) - A_ext @ coef.astype(np.longdouble)
        coef = coef + np.linalg.solve(R, Q.T @ r_ext.astype(float))
    resid = rhs - A @ coef
    dof = max(t.size - order - 1, 1)
    # the residuals cannot resolve errors below the precision of the data
    floor = np.mean((DATA_RELATIVE_ERROR * rhs) ** 2)
    sigma2 = max(resid @ resid / dof, floor)
    Rinv = np.linalg.inv(R)
    cov = sigma2 * (Rinv @ Rinv.T) / np.outer(scale, scale)
    b = coef / scale

    a, M = _shift_by_mass(b, params.q)
    cov_a = M @ cov @ M.T
    stderr = np.sqrt(np.clip(np.diag(cov_a), 0.0, None))
    return HeatExpansion(params, tuple(float(v) for v in a), "fit",
                         tuple(float(v) for v in stderr), cond)


def closed_form_expansion(params: OperatorParams, order: int = 2) -> HeatExpansion:
    """The expansion built from ``heat_coefficient``."""
    return HeatExpansion(params, tuple(heat_coefficient(i, params) for i in range(order + 1)))
