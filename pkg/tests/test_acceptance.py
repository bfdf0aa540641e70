"""Acceptance criteria 1 to 9.

Each test carries ``@pytest.mark.criterion(n)``; the terminal summary prints
one PASS/FAIL line per criterion. Run on its own with

    pytest tests/test_acceptance.py
"""

import itertools
import math
import sys
import time

import numpy as np
import pytest

from besselzeta import mellin_oracle, specfun
from besselzeta.heat_trace import OperatorParams, fit_heat_coefficients, heat_coefficient
from besselzeta.mellin_oracle import continue_zeta, default_split, mellin_invariants, numeric_residue
from besselzeta.regprod import (
    base_zeta_invariants,
    closed_form_product_constant,
    comparison_data,
    invariants_via_comparison,
    product_constant,
)
from besselzeta.zeta_core import (
    closed_form_invariants,
    rb_invariants,
    resolvent_trace,
    resolvent_trace_direct,
    zeta_at_zero,
)

NUS = [0.0, 0.25, 0.5, 1.0, 2.5]
QS = [0.1, 1.0, 5.0]
LS = [0.5, 1.0, math.pi]
GRID = [OperatorParams(nu, q, l) for nu, q, l in itertools.product(NUS, QS, LS)]
HALF = [OperatorParams(0.5, q, l) for l, q in itertools.product(LS, QS)]


def dirichlet_det(p):
    return 2.0 * math.sinh(p.q * p.l) / p.q


# ---------------------------------------------------------------------------
# 1. Determinant closed form at nu = 1/2


@pytest.mark.criterion(1)
@pytest.mark.parametrize("p", HALF)
def test_c1_determinant_half_integer(p):
    det = closed_form_invariants(p).det
    assert det == pytest.approx(dirichlet_det(p), rel=1e-10)


# ---------------------------------------------------------------------------
# 2. Three-route agreement


@pytest.mark.criterion(2)
def test_c2_three_routes_on_grid(monkeypatch):
    # time the grid from cold caches, zero tables included
    monkeypatch.setattr(specfun, "_TABLES", {})
    mellin_oracle._fitted_expansion.cache_clear()
    start = time.perf_counter()
    for nu in NUS:
        specfun.zero_table(nu, 2000)
    worst_cmp = worst_mel = 0.0
    for p in GRID:
        closed = closed_form_invariants(p).deriv0
        cmp_ = invariants_via_comparison(p).deriv0
        mel = mellin_invariants(p).deriv0
        worst_cmp = max(worst_cmp, abs(cmp_ - closed))
        worst_mel = max(worst_mel, abs(mel - closed), abs(mel - cmp_))
    elapsed = time.perf_counter() - start
    assert worst_cmp < 1e-8
    assert worst_mel < 1e-4
    assert elapsed < 600.0


# ---------------------------------------------------------------------------
# 3. Bessel zeta residues at s = 1 and s = -1


RB_POINTS = [(0.0, 1.0), (0.5, 1.0), (1.0, 0.3)]


@pytest.mark.criterion(3)
@pytest.mark.parametrize("nu,a", RB_POINTS)
def test_c3_residue_at_one(nu, a):
    assert rb_invariants(nu, a).poles[0].residue == 1.0
    # Res(zeta_RB, s = 1) = 2 Res(z, s = 1/2)
    numeric = 2.0 * numeric_residue(0.5, default_split(OperatorParams.rb(nu, a)))
    assert abs(numeric - 1.0) < 1e-5


@pytest.mark.criterion(3)
@pytest.mark.parametrize("nu,a", RB_POINTS)
def test_c3_residue_at_minus_one(nu, a):
    expected = -(nu**2 - 0.25 - math.pi**2 * a**2) / (2 * math.pi**2)
    assert rb_invariants(nu, a).poles[1].residue == pytest.approx(expected, rel=1e-14)
    numeric = 2.0 * numeric_residue(-0.5, default_split(OperatorParams.rb(nu, a)))
    assert abs(numeric - expected) < 1e-4


# ---------------------------------------------------------------------------
# 4. z(0)


@pytest.mark.criterion(4)
@pytest.mark.parametrize("p", GRID)
def test_c4_value_at_zero(p):
    formula = -0.5 * (p.nu + 0.5)
    assert zeta_at_zero(p) == formula
    assert abs(continue_zeta(0.0, default_split(p)) - formula) < 1e-6


@pytest.mark.criterion(4)
@pytest.mark.parametrize("nu", NUS)
def test_c4_q_and_l_independence(nu):
    values = {zeta_at_zero(OperatorParams(nu, q, l)) for q in (0.0, *QS, 37.0) for l in (*LS, 11.0)}
    assert values == {-0.5 * (nu + 0.5)}


# ---------------------------------------------------------------------------
# 5. Homogeneous limit


def homogeneous_value(nu):
    return 0.5 * math.log(2 ** (nu - 0.5) * math.gamma(nu + 1) / math.pi ** (nu + 1))


def extrapolate_to_zero(a1, y1, a2, y2):
    """Linear extrapolation in a^2 to a = 0."""
    x1, x2 = a1 * a1, a2 * a2
    return (x2 * y1 - x1 * y2) / (x2 - x1)


@pytest.mark.criterion(5)
@pytest.mark.parametrize("nu", [0.25, 1.0, 2.5])
def test_c5_homogeneous_limit(nu):
    y1 = rb_invariants(nu, 1e-3).deriv0
    y2 = rb_invariants(nu, 1e-4).deriv0
    assert abs(extrapolate_to_zero(1e-3, y1, 1e-4, y2) - homogeneous_value(nu)) < 1e-6


@pytest.mark.criterion(5)
@pytest.mark.parametrize("nu", [0.25, 1.0, 2.5])
def test_c5_homogeneous_limit_via_comparison(nu):
    ys = [0.5 * invariants_via_comparison(OperatorParams.rb(nu, a)).deriv0 for a in (1e-3, 1e-4)]
    assert abs(extrapolate_to_zero(1e-3, ys[0], 1e-4, ys[1]) - homogeneous_value(nu)) < 1e-6


# ---------------------------------------------------------------------------
# 6. Heat coefficients from the fit


# For l < pi the window t <= 0.1 already sees exp(-l^2/t) boundary terms,
# so the nine points are taken at l = pi.
HEAT_POINTS = [OperatorParams(nu, q, math.pi) for nu in (0.0, 1.0, 2.5) for q in QS]


@pytest.mark.criterion(6)
@pytest.mark.parametrize("p", HEAT_POINTS)
def test_c6_fitted_coefficients(p):
    fit = fit_heat_coefficients(p, grid=np.geomspace(1e-4, 1e-1, 200))
    for i in range(3):
        ref = heat_coefficient(i, p)
        assert abs(fit[i] - ref) <= 3 * fit.stderr[i], i
        assert abs(fit[i] - ref) <= 0.01 * abs(ref), i


# ---------------------------------------------------------------------------
# 7. Resolvent identity


RESOLVENT_POINTS = [OperatorParams(0.0, 1.0, 1.0), OperatorParams(0.5, 0.1, math.pi),
                    OperatorParams(1.0, 5.0, 0.5), OperatorParams(2.5, 1.0, math.pi),
                    OperatorParams(0.25, 0.3, 2.0)]


@pytest.mark.criterion(7)
@pytest.mark.parametrize("p", RESOLVENT_POINTS)
@pytest.mark.parametrize("lam", [0.0, -1.0, -100.0])
def test_c7_resolvent(p, lam):
    assert abs(resolvent_trace(lam, p) - resolvent_trace_direct(lam, p, terms=10_000)) < 1e-8


# ---------------------------------------------------------------------------
# 8. Product constant


@pytest.mark.criterion(8)
@pytest.mark.parametrize("p", GRID)
def test_c8_product_constant(p):
    accelerated = product_constant(comparison_data(p))
    assert accelerated == pytest.approx(closed_form_product_constant(p), rel=1e-9)


@pytest.mark.criterion(8)
@pytest.mark.parametrize("q", QS)
def test_c8_half_integer_sinh(q):
    p = OperatorParams(0.5, q, math.pi)
    ref = math.sinh(math.pi * q) / (math.pi * q)
    assert product_constant(comparison_data(p)) == pytest.approx(ref, rel=1e-10)
    assert closed_form_product_constant(p) == pytest.approx(ref, rel=1e-10)


# ---------------------------------------------------------------------------
# 9. Sign convention


@pytest.mark.criterion(9)
@pytest.mark.parametrize("p", HALF)
def test_c9_minus_log_c_passes_criterion_1(p):
    inv = invariants_via_comparison(p)
    assert inv.det == pytest.approx(dirichlet_det(p), rel=1e-10)


def plus_sign_deriv0(p):
    base = base_zeta_invariants(p).deriv0
    log_c = product_constant(comparison_data(p), full_output=True).logC
    return base + log_c, log_c


@pytest.mark.criterion(9)
@pytest.mark.xfail(strict=True, reason="z'(0) = zeta_b'(0) + log C has the wrong sign")
@pytest.mark.parametrize("p", HALF)
def test_c9_plus_log_c_fails_criterion_1(p):
    deriv0, _ = plus_sign_deriv0(p)
    assert math.exp(-deriv0) == pytest.approx(dirichlet_det(p), rel=1e-10)


@pytest.mark.criterion(9)
@pytest.mark.parametrize("p", HALF)
def test_c9_plus_sign_misses_by_two_log_c(p):
    deriv0, log_c = plus_sign_deriv0(p)
    miss = deriv0 - (-math.log(dirichlet_det(p)))
    assert miss == pytest.approx(2.0 * log_c, abs=1e-10)


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q"]))
