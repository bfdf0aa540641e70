"""Regularized products by comparison with a base sequence.

Given positive sequences a_n and b_n with |a_n - b_n| bounded and a base
zeta function zeta_b(s) = sum b_n^-s that converges for Re s > s_b, s_b < 1,
and extends analytically to s = 0:

    zeta_a(0)  = zeta_b(0)
    zeta_a'(0) = zeta_b'(0) - log C,     C = prod_n a_n / b_n.

The sign follows from -sum log a_n = -sum log b_n - sum log(a_n / b_n).

For L_nu + q^2 the base is b_n = (pi/l)^2 (n + u)^2 with u = (nu - 1/2)/2,
so zeta_b(s) = (l/pi)^{2s} zeta_H(2s, 1 + u) and 1 + u = (nu + 3/2)/2.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import specfun
from .errors import BudgetExceededError, HypothesisError
from .heat_trace import OperatorParams
from .zeta_core import ZetaInvariants

__all__ = [
    "ComparisonData",
    "BaseInvariants",
    "comparison_sequence",
    "base_zeta_invariants",
    "comparison_data",
    "check_hypotheses",
    "product_constant",
    "naive_log_product",
    "closed_form_product_constant",
    "invariants_via_comparison",
]

LOG_2PI = math.log(2.0 * math.pi)

# Hard cap on the number of explicitly summed factors.
MAX_PRODUCT_TERMS = 1_000_000

# Window on which the bounded difference and the decay of c_n are spot-checked.
HYPOTHESIS_WINDOW = (1_000, 100_000)

# Powers (n + u)^-2k in the fitted tail model.
FITTED_TAIL_ORDER = 3

Sequence = Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True)
class ComparisonData:
    """A target sequence a_n, a comparison sequence b_n and, once computed, C.

    ``log_ratio`` evaluates log(a_n / b_n) and may be supplied when that can
    be done more accurately than ``log(a_seq / b_seq)``. ``tail(N)`` returns
    ``(sum_{n > N} log(a_n / b_n), error)`` when the tail is known in closed
    form; otherwise a const/(n+u)^2 model fitted on the last decade is used.
    """

    a_seq: Sequence
    b_seq: Sequence
    u: float = 0.0
    log_ratio: Sequence | None = None
    tail: Callable[[int], tuple] | None = None
    C: float | None = None
    logC: float | None = None
    tail_bound: float | None = None
    terms: int | None = None

    def log_ratios(self, n) -> np.ndarray:
        n = np.asarray(n)
        if self.log_ratio is not None:
            return np.asarray(self.log_ratio(n), dtype=float)
        return np.log(self.a_seq(n) / self.b_seq(n))


@dataclass(frozen=True)
class BaseInvariants:
    value0: float
    deriv0: float


def comparison_sequence(params: OperatorParams, n):
    """b_n = (pi/l)^2 (n + u)^2 with u = (nu - 1/2)/2."""
    x = np.asarray(n, dtype=float) + params.u
    out = (math.pi / params.l) ** 2 * x * x
    return float(out) if out.ndim == 0 else out


def base_zeta_invariants(params: OperatorParams) -> BaseInvariants:
    """zeta_b(0) and zeta_b'(0) for zeta_b(s) = (l/pi)^{2s} zeta_H(2s, 1 + u)."""
    a = 1.0 + params.u
    value0 = 0.5 - a
    deriv0 = (2.0 * math.log(params.l / math.pi) * value0
              + 2.0 * specfun.hurwitz_zeta_deriv0(a))
    return BaseInvariants(value0, deriv0)


def comparison_data(params: OperatorParams) -> ComparisonData:
    """ComparisonData for a_n = j_{nu,n}^2/l^2 + q^2 against the Hurwitz base.

    log(a_n/b_n) = log1p(((j - beta)(j + beta) + l^2 q^2) / beta^2) with
    beta = pi (n + u), which keeps full relative accuracy for large n once
    j - beta is formed without rounding pi (n + u).
    The tail beyond N is summed through McMahon's expansion.
    """
    nu, l = params.nu, params.l
    c2 = (l * params.q) ** 2
    u = params.u

    def a_seq(n):
        j = specfun.bessel_zeros(nu, n)
        return (j / l) ** 2 + params.q**2

    def b_seq(n):
        return comparison_sequence(params, np.atleast_1d(n))

    def log_ratio(n):
        n = np.atleast_1d(n)
        j = specfun.bessel_zeros(nu, n)
        x = n + u
        beta = math.pi * x
        d = specfun.offset_from_pi_multiple(j, x)
        return np.log1p((d * (j + beta) + c2) / (beta * beta))

    def tail(after):
        return specfun.zero_log_ratio_tail(nu, c2, after)

    return ComparisonData(a_seq, b_seq, u, log_ratio, tail)


def _window(lo: int, hi: int, samples: int) -> np.ndarray:
    return np.unique(np.geomspace(lo, hi, samples).round().astype(np.int64))


def check_hypotheses(data: ComparisonData, window=HYPOTHESIS_WINDOW,
                     samples: int = 9) -> dict:
    """Spot-check the comparison hypotheses on a sampled index window.

    Checks positivity, growth of b_n faster than n (so s_b < 1), boundedness
    of |a_n - b_n| and the decay c_n = O(n^-2). Raises HypothesisError naming
    the failed condition; returns the sampled diagnostics otherwise.
    """
    n = _window(*window, samples)
    a = np.asarray(data.a_seq(n), dtype=float)
    b = np.asarray(data.b_seq(n), dtype=float)
    if not (np.all(np.isfinite(a)) and np.all(np.isfinite(b))
            and np.all(a > 0) and np.all(b > 0)):
        raise HypothesisError("positivity: sequences must be finite and positive", n=n)
    growth = math.log(b[-1] / b[0]) / math.log(n[-1] / n[0])
    if not growth > 1.0:
        raise HypothesisError(f"growth: base grows like n^{growth:.3g}, need s_b < 1",
                              growth=growth)
    diff = np.abs(a - b)
    half = n.size // 2
    bound = diff[:half + 1].max()
    # a bounded difference may wander but must not trend upward
    if diff[half:].max() > 2.0 * bound + 1e-9 * b[-1]:
        raise HypothesisError("bounded difference: |a_n - b_n| grows across the window",
                              diff=diff.tolist())
    decay = np.abs(data.log_ratios(n)) * (n + data.u) ** 2
    # c_n carries an absolute rounding error of a few ulps; discount it
    noise = 4.0 * np.finfo(float).eps * (n + data.u) ** 2
    if np.max(decay[half:] - noise[half:]) > 2.0 * decay[:half + 1].max() + 1e-12:
        raise HypothesisError("c_n does not decay like n^-2", decay=decay.tolist())
    return {"n": n.tolist(), "max_abs_diff": float(diff.max()),
            "growth_exponent": growth, "n2_cn": decay.tolist()}


def _fitted_tail(data: ComparisonData, terms: int, values: np.ndarray):
    """Kummer tail: fit sum_k d_k (n+u)^-2k on the last decade, sum in closed form."""
    first = max(1, terms // 10)
    n = np.arange(first, terms + 1)
    x = n + data.u
    y = values[first - 1:]
    scale = terms + data.u

    def tail_of_order(order):
        basis = np.column_stack([(scale / x) ** (2 * k) for k in range(1, order + 1)])
        d, *_ = np.linalg.lstsq(basis, y, rcond=None)
        return math.fsum(
            d[k - 1] * scale ** (2 * k) * specfun.hurwitz_zeta(2.0 * k, terms + 1 + data.u)
            for k in range(1, order + 1)
        )

    best = tail_of_order(FITTED_TAIL_ORDER)
    err = abs(best - tail_of_order(FITTED_TAIL_ORDER - 1))
    return best, err + 1e-16 * terms


def product_constant(data: ComparisonData, accuracy: float = 1e-12, terms: int = 2000,
                     check: bool = True, full_output: bool = False):
    """C = prod_n a_n / b_n with an accelerated tail.

    The first `terms` factors are multiplied out as a compensated sum of
    logarithms. The remainder comes from ``data.tail`` when available and
    from a fitted (n+u)^-2k model otherwise; `terms` doubles until the tail
    error is below `accuracy`. With ``full_output`` a copy of `data` carrying
    C, logC, tail_bound and terms is returned instead of C.
    """
    if check:
        check_hypotheses(data)
    n_terms = terms
    while True:
        values = data.log_ratios(np.arange(1, n_terms + 1))
        if data.tail is not None:
            tail, err = data.tail(n_terms)
        else:
            tail, err = _fitted_tail(data, n_terms, values)
        if err <= accuracy or n_terms >= MAX_PRODUCT_TERMS:
            break
        n_terms = min(2 * n_terms, MAX_PRODUCT_TERMS)
    if err > accuracy:
        raise BudgetExceededError(
            f"product tail error {err:.3g} above target {accuracy:.3g}",
            achievable=err, terms=n_terms,
        )
    log_c = math.fsum(values) + tail
    if not full_output:
        return math.exp(log_c)
    return dataclasses.replace(data, C=math.exp(log_c), logC=log_c,
                               tail_bound=err, terms=n_terms)


def naive_log_product(data: ComparisonData, terms: int, chunk: int = 100_000):
    """Partial sum sum_{n <= terms} log(a_n/b_n) and a bound on the remainder.

    The bound is K / (terms + u) with K the largest (n+u)^2 |log(a_n/b_n)|
    over the last decade, i.e. sum_{n > N} K/(n+u)^2 < K/(N+u).
    """
    parts = []
    for start in range(1, terms + 1, chunk):
        n = np.arange(start, min(start + chunk, terms + 1))
        parts.append(data.log_ratios(n))
    values = np.concatenate(parts)
    first = max(1, terms // 10)
    x = np.arange(first, terms + 1) + data.u
    k = float(np.max(np.abs(values[first - 1:]) * x * x))
    return math.fsum(values), k / (terms + data.u)


def closed_form_product_constant(params: OperatorParams) -> float:
    """1/C = sqrt(2) (lq)^nu / (pi^nu I_nu(lq) Gamma^2((nu + 3/2)/2)), as C."""
    nu = params.nu
    log_c = (nu * math.log(math.pi)
             + specfun.log_bessel_i_over_power(nu, params.l * params.q)
             + 2.0 * math.lgamma(0.5 * (nu + 1.5))
             - 0.5 * math.log(2.0))
    return math.exp(log_c)


def invariants_via_comparison(params: OperatorParams, accuracy: float = 1e-12,
                              terms: int = 2000) -> ZetaInvariants:
    """z(0) and z'(0) from the Hurwitz base and the product constant."""
    base = base_zeta_invariants(params)
    data = product_constant(comparison_data(params), accuracy=accuracy, terms=terms,
                            full_output=True)
    deriv0 = base.deriv0 - data.logC
    err = data.tail_bound + 16.0 * np.finfo(float).eps * (abs(base.deriv0) + abs(data.logC))
    return ZetaInvariants(base.value0, deriv0, "comparison", err,
                          extra={"logC": data.logC, "C": data.C, "terms": data.terms,
                                 "base_deriv0": base.deriv0})
