"""Special functions used throughout the package.

Log-gamma, gamma ratios, the Bessel functions J_nu and I_nu (the latter only
through its logarithm), certified tables of the positive zeros j_{nu,n} of
J_nu, and the Hurwitz zeta function.

Everything here is a pure function of its arguments except the zero-table
cache, which is guarded by a lock: a table is built by one writer and is
immutable afterwards.
"""

from __future__ import annotations

import functools
import math
import threading
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
from scipy import integrate, special

from .errors import DomainError, NumericError, PoleError

__all__ = [
    "ZeroTable",
    "log_gamma",
    "gamma_ratio",
    "gamma_neg_half_integer",
    "bessel_j",
    "bessel_j_deriv",
    "bessel_zero",
    "bessel_zeros",
    "zero_table",
    "log_bessel_i",
    "log_bessel_i_deriv",
    "bessel_i_ratio",
    "log_bessel_i_over_power",
    "hurwitz_zeta",
    "hurwitz_zeta_deriv0",
    "mcmahon_zero",
    "offset_from_pi_multiple",
    "certificate_tol",
    "zero_power_tail",
    "zero_log_ratio_tail",
]

# Below this argument log I_nu uses the ascending series, above it the
# exponentially scaled library value. Chosen by the sweep in
# tests/test_specfun.py::test_log_bessel_i_crossover_sweep.
LOG_I_SERIES_MAX = 20.0

# Euler-Maclaurin for the Hurwitz zeta function shifts the argument to at
# least this value before applying the Bernoulli correction.
HURWITZ_EM_SHIFT = 20.0
HURWITZ_EM_TERMS = 30

# Grid step of the sign-change scan that brackets the zeros of J_nu. Must be
# smaller than the minimal spacing of consecutive zeros (> 2.9 for nu >= 0).
ZERO_SCAN_STEP = 1.0

# Newton residual certificate: |J(x)| <= tol(x) |J'(x)| at every zero, with
# tol(x) = max(ZERO_TOL, 8 ulp-equivalents of x) since far out the spacing of
# doubles exceeds ZERO_TOL.
ZERO_TOL = 1e-12

# Zeros up to this index are served from the cached table; beyond it
# bessel_zero refines an isolated McMahon guess inside its bracket.
ZERO_TABLE_LIMIT = 1_000_000



def log_gamma(x: float) -> float:
    """ln Gamma(x) for x > 0."""
    if not x > 0:
        raise DomainError(f"log_gamma requires x > 0, got {x!r}")
    return math.lgamma(x)


def gamma_ratio(nu: float, k: int) -> float:
    """Gamma(nu + k + 1/2) / Gamma(nu - k + 1/2) as a product of 2k factors.

    The product form stays finite where the quotient has spurious poles
    (nu - k + 1/2 a non-positive integer).
    """
    if k < 0:
        raise DomainError(f"gamma_ratio requires k >= 0, got {k}")
    top = nu + k + 0.5
    return math.prod(top - m for m in range(1, 2 * k + 1))


def gamma_neg_half_integer(k: int) -> float:
    """Gamma(1/2 - k) for k >= 0, via the reflection formula.

    Gamma(1/2 - k) Gamma(1/2 + k) = (-1)^k pi and
    Gamma(1/2 + k) = (2k)! sqrt(pi) / (4^k k!).
    """
    if k < 0:
        raise DomainError("k must be non-negative")
    ratio = Fraction(4**k * math.factorial(k), math.factorial(2 * k))
    return (-1) ** k * float(ratio) * math.sqrt(math.pi)


def bessel_j(nu, x):
    """Bessel function of the first kind J_nu(x), x > 0."""
    return special.jv(nu, x)


def bessel_j_deriv(nu, x):
    """dJ_nu/dx from the recurrence J' = (nu/x) J_nu - J_{nu+1}."""
    x = np.asarray(x, dtype=float)
    return nu / x * special.jv(nu, x) - special.jv(nu + 1.0, x)


# ---------------------------------------------------------------------------
# Zeros of J_nu
# ---------------------------------------------------------------------------


def _mcmahon_coefficients(nu: float) -> np.ndarray:
    """Coefficients m_k of j/beta = sum_k m_k beta^{-2k}, beta = (n + nu/2 - 1/4) pi."""
    mu = 4.0 * nu * nu
    return np.array([
        1.0,
        -(mu - 1.0) / 8.0,
        -4.0 * (mu - 1.0) * (7.0 * mu - 31.0) / (3.0 * 8.0**3),
        -32.0 * (mu - 1.0) * (83.0 * mu**2 - 982.0 * mu + 3779.0) / (15.0 * 8.0**5),
        -64.0 * (mu - 1.0)
        * (6949.0 * mu**3 - 153855.0 * mu**2 + 1585743.0 * mu - 6277237.0)
        / (105.0 * 8.0**7),
    ])


def mcmahon_zero(nu: float, n):
    """McMahon's large-n asymptotic approximation to j_{nu,n}."""
    beta = (np.asarray(n, dtype=float) + 0.5 * nu - 0.25) * math.pi
    w = 1.0 / (beta * beta)
    return beta * np.polynomial.polynomial.polyval(w, _mcmahon_coefficients(nu))


# pi = _PI_HI + _PI_LO to about 32 digits
_PI_HI = math.pi
_PI_LO = 1.2246467991473532e-16
_SPLITTER = 134217729.0  # 2^27 + 1


def _two_product(a, b):
    """a * b = p + e exactly (Dekker), vectorised."""
    p = a * b
    t = _SPLITTER * a
    a_hi = t - (t - a)
    a_lo = a - a_hi
    t = _SPLITTER * b
    b_hi = t - (t - b)
    b_lo = b - b_hi
    e = ((a_hi * b_hi - p) + a_hi * b_lo + a_lo * b_hi) + a_lo * b_lo
    return p, e


def offset_from_pi_multiple(z, x):
    """z - pi x without the rounding of pi x.

    Rounding pi x costs a relative 1e-16 that does not average out: summed
    over thousands of terms like log(j_n / (pi (n + u))) it grows linearly.
    """
    x = np.asarray(x, dtype=float)
    p, e = _two_product(np.full_like(x, _PI_HI), x)
    return (np.asarray(z, dtype=float) - p) - e - _PI_LO * x


def _newton_in_brackets(nu, lo, hi, guess, max_iter=80):
    """Safeguarded Newton on J_nu, vectorised over independent brackets."""
    flo = special.jv(nu, lo)
    x = np.where((guess > lo) & (guess < hi), guess, 0.5 * (lo + hi))
    lo, hi = lo.copy(), hi.copy()
    done = np.zeros(x.shape, dtype=bool)
    for _ in range(max_iter):
        fx = special.jv(nu, x)
        same = np.sign(fx) == np.sign(flo)
        lo = np.where(same, x, lo)
        hi = np.where(same, hi, x)
        dfx = nu / x * fx - special.jv(nu + 1.0, x)
        with np.errstate(divide="ignore", invalid="ignore"):
            xn = x - fx / dfx
        bad = ~np.isfinite(xn) | (xn < lo) | (xn > hi)
        xn = np.where(bad, 0.5 * (lo + hi), xn)
        converged = (np.abs(xn - x) <= 2.0 * np.finfo(float).eps * x) | (fx == 0.0)
        x = np.where(done | (fx == 0.0), x, xn)
        done |= converged
        if done.all():
            break
    return x, done


def _scan_brackets(nu: float, count: int):
    """Sign-change brackets of the first `count` positive zeros of J_nu."""
    h = ZERO_SCAN_STEP
    # j_{nu,n} < (n + nu/2 + 1/4) pi + nu for the orders handled here.
    xmax = (count + 0.5 * nu + 1.0) * math.pi + nu + 2.0 * h
    while True:
        grid = np.arange(h, xmax + h, h)
        vals = special.jv(nu, grid)
        idx = np.flatnonzero(np.signbit(vals[:-1]) != np.signbit(vals[1:]))
        if idx.size >= count:
            idx = idx[:count]
            return grid[idx], grid[idx + 1]
        xmax *= 1.5


def _compute_zeros(nu: float, count: int) -> np.ndarray:
    lo, hi = _scan_brackets(nu, count)
    guess = mcmahon_zero(nu, np.arange(1, count + 1))
    x, done = _newton_in_brackets(nu, lo, hi, guess)
    if not done.all():
        bad = np.flatnonzero(~done)
        raise NumericError(
            f"Newton iteration for zeros of J_{nu} did not converge",
            nu=nu, indices=(bad + 1).tolist()[:10],
        )
    return x


@dataclass(frozen=True)
class ZeroTable:
    """Positive zeros j_{nu,1} < j_{nu,2} < ... of J_nu.

    Each stored zero was bracketed by a sign change on a grid finer than the
    zero spacing (so none is skipped or doubled) and refined by Newton's
    method until ``|J_nu(x)| <= tol * |J_nu'(x)|``.
    """

    nu: float
    zeros: np.ndarray = field(repr=False)
    tol: float = ZERO_TOL

    def __post_init__(self):
        self.zeros.setflags(write=False)

    def __len__(self) -> int:
        return self.zeros.size

    def __getitem__(self, n):
        return self.zeros[n]

    def zero(self, n: int) -> float:
        """j_{nu,n}, 1-based."""
        return float(self.zeros[n - 1])

    def residual_ratio(self) -> float:
        """max_n |J_nu(j_n)| / |J_nu'(j_n)| over the table."""
        z = self.zeros
        return float(np.max(np.abs(special.jv(self.nu, z)
                                   / bessel_j_deriv(self.nu, z))))

    def certified(self) -> bool:
        """Whether every zero satisfies its Newton residual certificate."""
        z = self.zeros
        ratio = np.abs(special.jv(self.nu, z) / bessel_j_deriv(self.nu, z))
        return bool(np.all(ratio <= certificate_tol(z)))


def certificate_tol(x):
    """Residual bound |J/J'| that a refined zero near x must satisfy."""
    return np.maximum(ZERO_TOL, 8.0 * np.finfo(float).eps * np.asarray(x))


_TABLES: dict[float, ZeroTable] = {}
_TABLES_LOCK = threading.Lock()


def zero_table(nu: float, count: int) -> ZeroTable:
    """A certified table holding at least the first `count` zeros of J_nu.

    Tables are cached per order and grown geometrically; the returned table
    may be longer than requested.
    """
    if nu < 0:
        raise DomainError(f"negative orders are not supported (nu={nu})")
    if count < 1:
        raise DomainError("count must be positive")
    nu = float(nu)
    table = _TABLES.get(nu)
    if table is not None and len(table) >= count:
        return table
    with _TABLES_LOCK:
        table = _TABLES.get(nu)
        if table is not None and len(table) >= count:
            return table
        size = max(count, 2 * len(table) if table is not None else 256)
        zeros = _compute_zeros(nu, size)
        if zeros.size > 1 and not np.all(np.diff(zeros) > 1.0):
            raise NumericError("zero table is not strictly separated", nu=nu)
        table = ZeroTable(nu, zeros)
        if not table.certified():
            raise NumericError("zero table failed its residual certificate",
                               nu=nu, worst=table.residual_ratio())
        _TABLES[nu] = table
        return table


def _isolated_zeros(nu: float, n) -> np.ndarray:
    """McMahon estimates refined inside [beta - pi/2, beta + pi/2], for n > nu."""
    n = np.atleast_1d(np.asarray(n, dtype=float))
    beta = (n + 0.5 * nu - 0.25) * math.pi
    lo, hi = beta - 0.5 * math.pi, beta + 0.5 * math.pi
    if np.any(special.jv(nu, lo) * special.jv(nu, hi) >= 0):
        raise NumericError("McMahon bracket has no sign change", nu=nu)
    x, done = _newton_in_brackets(nu, lo, hi, mcmahon_zero(nu, n))
    if not done.all():
        raise NumericError("Newton iteration did not converge", nu=nu)
    return x


def bessel_zeros(nu: float, n) -> np.ndarray:
    """j_{nu,n} for an array of indices without growing the shared table.

    Indices already covered by the cached table are read from it; the others
    (which must exceed nu + 1) are refined individually from McMahon's
    estimate inside their bracket.
    """
    n = np.atleast_1d(np.asarray(n, dtype=np.int64))
    if np.any(n < 1):
        raise DomainError("zero indices must be >= 1")
    table = _TABLES.get(float(nu))
    have = len(table) if table is not None else 0
    out = np.empty(n.shape)
    inside = n <= have
    if inside.any():
        out[inside] = table.zeros[n[inside] - 1]
    rest = ~inside
    if rest.any():
        small = n[rest] <= nu + 1.0
        if small.any():
            table = zero_table(nu, int(n[rest].max()))
            out[rest] = table.zeros[n[rest] - 1]
        else:
            out[rest] = _isolated_zeros(nu, n[rest])
    return out


def bessel_zero(nu: float, n: int) -> float:
    """The n-th positive zero j_{nu,n} of J_nu.

    Zeros up to ``ZERO_TABLE_LIMIT`` come from the shared certified table.
    Beyond it the McMahon estimate is refined inside the bracket
    ``[beta - pi/2, beta + pi/2]``, which isolates j_{nu,n} once n exceeds nu.
    """
    if n < 1:
        raise DomainError(f"zero index must be >= 1, got {n}")
    if n <= ZERO_TABLE_LIMIT:
        return zero_table(nu, n).zero(n)
    return float(_isolated_zeros(nu, n)[0])


# ---------------------------------------------------------------------------
# Modified Bessel function I_nu
# ---------------------------------------------------------------------------


def _log_i_series_tail(nu: float, x: float) -> float:
    """log of sum_k (x^2/4)^k / (k! (nu+1)_k), i.e. I_nu(x) Gamma(nu+1) (x/2)^-nu."""
    y = 0.25 * x * x
    term, total = 1.0, 0.0
    k = 0
    while True:
        k += 1
        term *= y / (k * (nu + k))
        total += term
        if term <= 1e-17 * total or k > 500:
            break
    return math.log1p(total)


def log_bessel_i(nu: float, x: float) -> float:
    """ln I_nu(x) for x > 0, computed without forming I_nu itself."""
    if not x > 0:
        raise DomainError(f"log_bessel_i requires x > 0, got {x!r}")
    if x <= LOG_I_SERIES_MAX:
        return nu * math.log(0.5 * x) - math.lgamma(nu + 1.0) + _log_i_series_tail(nu, x)
    return math.log(special.ive(nu, x)) + x


def log_bessel_i_over_power(nu: float, x: float) -> float:
    """ln(I_nu(x) / x^nu), continuous down to x = 0."""
    if x < 0:
        raise DomainError("x must be non-negative")
    if x <= LOG_I_SERIES_MAX:
        return -nu * math.log(2.0) - math.lgamma(nu + 1.0) + _log_i_series_tail(nu, x)
    return log_bessel_i(nu, x) - nu * math.log(x)


def bessel_i_ratio(nu: float, x: float) -> float:
    """I_{nu+1}(x) / I_nu(x) for x > 0."""
    if x < 1e-8:
        return x / (2.0 * (nu + 1.0))
    return float(special.ive(nu + 1.0, x) / special.ive(nu, x))


def log_bessel_i_deriv(nu: float, x: float) -> float:
    """d/dx ln I_nu(x) = nu/x + I_{nu+1}(x)/I_nu(x)."""
    return nu / x + bessel_i_ratio(nu, x)


# ---------------------------------------------------------------------------
# Hurwitz zeta
# ---------------------------------------------------------------------------


@functools.lru_cache(maxsize=None)
def _bernoulli_exact(m: int) -> tuple:
    b = [Fraction(1)]
    for n in range(1, m + 1):
        b.append(-sum(math.comb(n + 1, k) * b[k] for k in range(n)) / (n + 1))
    return tuple(b)


# scipy.special.bernoulli is off by ~1e-12 relative already at B_4
_BERNOULLI = [float(b) for b in _bernoulli_exact(2 * HURWITZ_EM_TERMS + 2)]


def _bernoulli_poly(m: int, a: float) -> float:
    # exact rational evaluation; the float polynomial cancels badly near its roots
    b = _bernoulli_exact(m)
    x = Fraction(a)
    return float(sum(math.comb(m, k) * b[k] * x ** (m - k) for k in range(m + 1)))


def _hurwitz_em(s: float, a: float) -> float:
    shift = max(0, math.ceil(HURWITZ_EM_SHIFT + abs(s) - a))
    X = shift + a
    terms = [(n + a) ** -s for n in range(shift)]
    x1s = X ** (1.0 - s)
    terms.append(x1s / (s - 1.0))
    terms.append(0.5 * X**-s)
    poch = s  # s (s+1) ... (s+2k-2)
    xpow = x1s / (X * X)  # X^{1-s-2k}
    fact = 2.0  # (2k)!
    for k in range(1, HURWITZ_EM_TERMS + 1):
        term = _BERNOULLI[2 * k] / fact * poch * xpow
        terms.append(term)
        if poch == 0.0 or abs(term) < 1e-18 * abs(math.fsum(terms)):
            break
        poch *= (s + 2 * k - 1) * (s + 2 * k)
        xpow /= X * X
        fact *= (2 * k + 1) * (2 * k + 2)
    return math.fsum(terms)


def _hurwitz_hermite(s: float, a: float) -> float:
    # Hermite's integral: the Euler-Maclaurin expansion with its remainder in
    # closed form. Used for s < 0, where a large shift would cancel badly.
    def integrand(t):
        return math.sin(s * math.atan2(t, a)) * (a * a + t * t) ** (-0.5 * s) / math.expm1(2 * math.pi * t)

    # e^{-2 pi t} has killed the integrand long before t = 30 for |s| <= 30
    tail, _ = integrate.quad(integrand, 0.0, 30.0, epsabs=0.0, epsrel=2e-14,
                             limit=200, points=(1.0, 5.0))
    return math.fsum([0.5 * a**-s, a ** (1.0 - s) / (s - 1.0), 2.0 * tail])


def hurwitz_zeta(s: float, a: float) -> float:
    """Hurwitz zeta function zeta_H(s, a) = sum_{n>=0} (n + a)^-s for real s != 1."""
    if not a > 0:
        raise DomainError(f"hurwitz_zeta requires a > 0, got {a!r}")
    if s == 1:
        raise PoleError("hurwitz_zeta has a pole at s = 1")
    if s <= 0 and s == int(s):
        m = int(-s)
        return -_bernoulli_poly(m + 1, a) / (m + 1)
    if s > 0:
        return _hurwitz_em(s, a)
    head = []
    while a < 1.0:
        head.append(a**-s)
        a += 1.0
    return math.fsum(head + [_hurwitz_hermite(s, a)])


def hurwitz_zeta_deriv0(a: float) -> float:
    """d/ds zeta_H(s, a) at s = 0, by Lerch's formula ln Gamma(a) - ln(2 pi)/2."""
    return log_gamma(a) - 0.5 * math.log(2.0 * math.pi)


# ---------------------------------------------------------------------------
# Tails of sums over zeros
# ---------------------------------------------------------------------------
# For n > N the zeros follow McMahon's expansion j = beta * m(w), w = beta^-2,
# beta = pi (n + u), u = nu/2 - 1/4. Then (j^2 + c2)/beta^2 = P(w) is a power
# series in w and sums of functions of P(w_n) reduce to Hurwitz zeta values.


def _series_mul(p, q, order):
    return np.convolve(p, q)[: order + 1]


def _series_log(p, order):
    """log of a power series with p[0] = 1."""
    p = np.asarray(p, dtype=float)
    out = np.zeros(order + 1)
    for n in range(1, order + 1):
        acc = n * p[n] if n < p.size else 0.0
        for k in range(1, n):
            if n - k < p.size:
                acc -= k * out[k] * p[n - k]
        out[n] = acc / n
    return out


def _series_exp(c, order):
    """exp of a power series with c[0] = 0."""
    out = np.zeros(order + 1)
    out[0] = 1.0
    for n in range(1, order + 1):
        out[n] = sum(k * c[k] * out[n - k] for k in range(1, n + 1)) / n
    return out


def _shifted_square_series(nu: float, c2: float) -> np.ndarray:
    """Coefficients of P(w) = (j/beta)^2 + c2 w in powers of w."""
    m = _mcmahon_coefficients(nu)
    order = m.size - 1
    p = _series_mul(m, m, order)
    p[1] += c2
    return p


def zero_power_tail(nu: float, c2: float, s: float, after: int):
    """sum_{n > after} (j_{nu,n}^2 + c2)^-s from McMahon's expansion.

    Returns ``(value, error_estimate)``. Requires 2s > 1 and ``after`` large
    enough that c2 / beta^2 is small.
    """
    u = 0.5 * nu - 0.25
    a = after + 1 + u
    p = _shifted_square_series(nu, c2)
    order = p.size - 1
    coeffs = _series_exp(-s * _series_log(p, order), order)
    terms = [coeffs[k] * math.pi ** (-2 * s - 2 * k) * hurwitz_zeta(2 * s + 2 * k, a)
             for k in range(order + 1)]
    return math.fsum(terms), abs(terms[-1]) + 1e-16 * abs(terms[0])


def zero_log_ratio_tail(nu: float, c2: float, after: int):
    """sum_{n > after} ln((j_{nu,n}^2 + c2) / (pi^2 (n + u)^2)), u = nu/2 - 1/4.

    Returns ``(value, error_estimate)``.
    """
    u = 0.5 * nu - 0.25
    a = after + 1 + u
    p = _shifted_square_series(nu, c2)
    order = p.size - 1
    coeffs = _series_log(p, order)
    terms = [coeffs[k] * math.pi ** (-2 * k) * hurwitz_zeta(2 * k, a)
             for k in range(1, order + 1)]
    return math.fsum(terms), abs(terms[-1]) + 1e-16 * abs(terms[0])
