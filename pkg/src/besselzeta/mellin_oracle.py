"""Numerical continuation of z(s) from the heat trace.

    Gamma(s) z(s) = int_0^inf t^{s-1} f(t) dt

is split at t_split. On (0, t_split] the first I + 1 terms of the small-t
expansion are subtracted and integrated in closed form, which continues the
integral to s > (1 - I)/2 with simple poles at s = 1/2, -1/2, ... . The
expansion coefficients come from a least-squares fit of the spectrally
summed trace, so nothing here relies on the closed formulas for a_i.

Below t_model the subtracted remainder g is replaced by the fitted terms of
order > I (integrated exactly); between t_model and t_split it is the exact
trace minus the subtraction. This keeps the quadrature away from the region
where f is large and g is a small difference.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate

from .errors import DomainError, NearPoleError, NumericError
from .heat_trace import HeatExpansion, OperatorParams, fit_heat_coefficients, heat_trace
from .zeta_core import ZetaInvariants

__all__ = [
    "MellinSplit",
    "default_split",
    "continue_zeta",
    "continue_deriv0",
    "numeric_residue",
    "mellin_invariants",
]

EULER_GAMMA = float(np.euler_gamma)

DEFAULT_ORDER = 4
DEFAULT_T_SPLIT = 1.0
DEFAULT_QUAD_TOL = 1e-12
NEAR_POLE = 1e-3

# Fit window in units of l^2, and the point (same units) below which the
# fitted model replaces the exact remainder.
FIT_WINDOW = (1e-6, 1e-2)
FIT_POINTS = 200
FIT_ORDER = 11
MODEL_BELOW = 1e-4

DEFAULT_H_SCHEDULE = tuple(0.1 * 2.0**-m for m in range(6))


@dataclass(frozen=True)
class MellinSplit:
    """Everything needed to evaluate the split Mellin representation.

    ``coeffs`` must reach past order I; terms above I describe g(t) below
    ``t_model``.
    """

    params: OperatorParams
    coeffs: HeatExpansion
    I: int = DEFAULT_ORDER
    t_split: float = DEFAULT_T_SPLIT
    quad_tol: float = DEFAULT_QUAD_TOL
    t_model: float | None = None

    def __post_init__(self):
        if self.I < 1:
            raise DomainError("subtraction order I must be >= 1")
        if self.coeffs.order < self.I:
            raise DomainError("heat expansion is shorter than the subtraction order")
        if self.t_model is None:
            object.__setattr__(self, "t_model", MODEL_BELOW * self.params.l**2)
        if not 0 < self.t_model < self.t_split:
            raise DomainError("need 0 < t_model < t_split")

    @property
    def strip(self) -> float:
        """Continuation is valid for s > strip."""
        return 0.5 * (1 - self.I)

    def poles(self) -> list:
        return [0.5 * (1 - i) for i in range(0, self.I + 1, 2)]

    def with_tol(self, quad_tol: float) -> "MellinSplit":
        return MellinSplit(self.params, self.coeffs, self.I, self.t_split, quad_tol,
                           self.t_model)


@functools.lru_cache(maxsize=256)
def _fitted_expansion(params: OperatorParams) -> HeatExpansion:
    grid = params.l**2 * np.geomspace(*FIT_WINDOW, FIT_POINTS)
    return fit_heat_coefficients(params, grid=grid, order=FIT_ORDER)


def default_split(params: OperatorParams, I: int = DEFAULT_ORDER,
                  quad_tol: float = DEFAULT_QUAD_TOL) -> MellinSplit:
    """Split with fitted coefficients (cached per parameter point)."""
    return MellinSplit(params, _fitted_expansion(params), I, DEFAULT_T_SPLIT, quad_tol)


def _g(t: float, split: MellinSplit) -> float:
    return heat_trace(t, split.params) - float(split.coeffs.evaluate(t, split.I))


def _quad(func, a, b, tol):
    value, err = integrate.quad(func, a, b, epsabs=tol, epsrel=tol, limit=400)
    return value, err


def _lower_integral(s: float, split: MellinSplit):
    """int_{t_model}^{t_split} t^{s-1} g(t) dt, via t = tau^2."""
    def integrand(tau):
        return 2.0 * tau ** (2.0 * s - 1.0) * _g(tau * tau, split)

    return _quad(integrand, math.sqrt(split.t_model), math.sqrt(split.t_split),
                 split.quad_tol)


def _upper_integral(s: float, split: MellinSplit):
    """int_{t_split}^inf t^{s-1} f(t) dt."""
    def integrand(t):
        return t ** (s - 1.0) * heat_trace(t, split.params)

    return _quad(integrand, split.t_split, math.inf, split.quad_tol)


def _power_terms(s: float, split: MellinSplit):
    """Closed-form pieces: subtraction terms at t_split and model terms at t_model."""
    c = split.coeffs
    terms = []
    for i in range(c.order + 1):
        t_end = split.t_split if i <= split.I else split.t_model
        e = s + 0.5 * (i - 1)
        terms.append(c[i] * t_end**e / e)
    return terms


def _gamma_times_zeta(s: float, split: MellinSplit):
    """Gamma(s) z(s) and an error estimate, without any pole check."""
    lower, e1 = _lower_integral(s, split)
    upper, e2 = _upper_integral(s, split)
    closed = _power_terms(s, split)
    return math.fsum(closed + [lower, upper]), e1 + e2 + _coefficient_error(s, split)


def _coefficient_error(s: float, split: MellinSplit) -> float:
    stderr = split.coeffs.stderr
    if stderr is None:
        return 0.0
    err = 0.0
    for i, se in enumerate(stderr):
        t_end = split.t_split if i <= split.I else split.t_model
        e = s + 0.5 * (i - 1)
        if e != 0.0:
            err += se * abs(t_end**e / e)
    return err


def _check_s(s: float, split: MellinSplit):
    if not s > split.strip:
        raise DomainError(f"s={s} lies outside the continuation strip s > {split.strip}")
    for p in split.poles():
        if abs(s - p) < NEAR_POLE:
            raise NearPoleError(f"s={s} is within {NEAR_POLE} of the pole at {p}; "
                                "use numeric_residue", pole=p)


def continue_zeta(s: float, split: MellinSplit, full_output: bool = False):
    """z(s) from the split Mellin representation.

    At s = 0 and at negative integers, where Gamma(s) has a pole and z is
    regular, the value is the matching residue of Gamma(s) z(s) divided by
    that of Gamma: z(-m) = (-1)^m m! a_{2m+1}.
    """
    _check_s(s, split)
    if s <= 0 and float(s).is_integer():
        m = int(-s)
        i = 2 * m + 1
        c = split.coeffs
        value = (-1) ** m * math.factorial(m) * c[i]
        err = math.factorial(m) * (c.stderr[i] if c.stderr else 0.0)
        return (value, err) if full_output else value
    F, err = _gamma_times_zeta(s, split)
    g = math.gamma(s)
    value, err = F / g, err / abs(g)
    return (value, err) if full_output else value


def continue_deriv0(split: MellinSplit, full_output: bool = False):
    """z'(0) from the Laurent expansion of Gamma(s) z(s) at 0.

    Gamma(s) z(s) = a_1/s + F0 + O(s) and 1/Gamma(s) = s + gamma s^2 + ...,
    so z'(0) = F0 + gamma a_1.
    """
    if split.I < 2:
        raise DomainError("continue_deriv0 needs subtraction order I >= 2")
    c = split.coeffs
    pieces = [c[1] * math.log(split.t_split)]
    err = 0.0
    stderr = c.stderr or (0.0,) * (c.order + 1)
    for i in range(c.order + 1):
        if i == 1:
            continue
        t_end = split.t_split if i <= split.I else split.t_model
        w = t_end ** (0.5 * (i - 1)) * 2.0 / (i - 1)
        pieces.append(c[i] * w)
        err += stderr[i] * abs(w)
    lower, e1 = _lower_integral(0.0, split)
    upper, e2 = _upper_integral(0.0, split)
    pieces += [lower, upper, EULER_GAMMA * c[1]]
    err += e1 + e2 + stderr[1] * abs(math.log(split.t_split) + EULER_GAMMA)
    value = math.fsum(pieces)
    return (value, err) if full_output else value


def _neville(h: np.ndarray, y: np.ndarray):
    """Extrapolate the polynomial through (h, y) to h = 0; returns value and error."""
    n = len(h)
    table = [list(y)]
    for k in range(1, n):
        prev = table[-1]
        row = [(h[j + k] * prev[j] - h[j] * prev[j + 1]) / (h[j + k] - h[j])
               for j in range(n - k)]
        table.append(row)
    best = float(table[-1][0])
    err = float(abs(best - table[-2][-1])) if n > 1 else math.inf
    return best, err


def numeric_residue(s0: float, split: MellinSplit, h_schedule=DEFAULT_H_SCHEDULE,
                    full_output: bool = False, max_error: float = 1e-3):
    """Extrapolated limit of (s - s0) z(s) as s -> s0 from the right.

    Samples s = s0 + h for h in the decreasing schedule and extrapolates the
    interpolating polynomial to h = 0. Raises NumericError if the last two
    extrapolation orders disagree by more than `max_error`.
    """
    h = np.asarray(sorted(h_schedule, reverse=True), dtype=float)
    if h.size < 2 or np.any(h <= 0):
        raise DomainError("h_schedule needs at least two positive offsets")
    if not s0 + h[-1] > split.strip:
        raise DomainError(f"s0={s0} lies outside the continuation strip")
    y = np.empty_like(h)
    for k, hk in enumerate(h):
        s = s0 + hk
        F, _ = _gamma_times_zeta(s, split)
        y[k] = hk * F / math.gamma(s)
    value, err = _neville(h, y)
    if not err <= max_error:
        raise NumericError(f"residue extrapolation at s0={s0} did not settle", err=err,
                           samples=y.tolist())
    return (value, err) if full_output else value


def mellin_invariants(params: OperatorParams, split: MellinSplit | None = None) -> ZetaInvariants:
    split = split or default_split(params)
    v0, e0 = continue_zeta(0.0, split, full_output=True)
    d0, e1 = continue_deriv0(split, full_output=True)
    return ZetaInvariants(v0, d0, "mellin_oracle", e1,
                          extra={"value0_err": e0, "coeff_source": split.coeffs.source,
                                 "I": split.I, "t_split": split.t_split})
