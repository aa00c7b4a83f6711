"""Variances and uncertainty product of the spherical Abel-Poisson wavelet.

The wavelet at scale rho has Gegenbauer coefficients

    h(l) = (lam + l)/lam * sqrt(2 rho l) * exp(-rho l).

Substituting them into the coefficient formulas gives, with q = exp(-2 rho)
and S_m = S_{n,m}(rho),

    var_S = (e^rho A / B)^2 - 1,      var_M = C / A,
    A = S_2/lam + S_1,
    C = S_4/lam + 3 S_3 + 2 lam S_2,
    B = sum_l (l+2lam)/lam binom(l+2lam-1, l) sqrt(l(l+1)) q^l.

A and C are exact rational functions of q; B has no closed form and is summed
directly.  Writing B = S_2/lam + (1/(2lam) + 2) S_1 + (1 - 1/(8lam)) S_0 + R,
the rest term obeys |R| <= S_{n,-1}/4.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np

from .localization import COEFF_TOL, CoefficientSequence
from .qseries import (
    BoundViolationError,
    QRational,
    SeriesIndex,
    certified_sum,
    qrational_eval,
    s2_minus1_closed,
    s_closed_eval,
    s_closed_form,
    s_numeric,
)
from .special_fn import Lambda, binomial_weights

_EPS = np.finfo(float).eps


@dataclass(frozen=True)
class AbelPoissonWavelet:
    n: int
    rho: float

    def __post_init__(self):
        Lambda(self.n)
        if not self.rho > 0:
            raise ValueError(f"scale rho must be positive, got {self.rho}")

    @property
    def lam(self) -> float:
        return (self.n - 1) / 2


@dataclass(frozen=True)
class ABCValues:
    a: float
    b: float
    c: float
    a_err: float
    b_err: float
    c_err: float

    def __post_init__(self):
        if not (self.a > 0 and self.b > 0 and self.c > 0):
            raise ArithmeticError(f"A, B, C must be positive, got {self.a}, {self.b}, {self.c}")


@dataclass(frozen=True)
class RestTerm:
    r: float
    bound: float
    numerical_error: float
    b: float
    main_part: float


def ap_coefficients(w: AbelPoissonWavelet) -> CoefficientSequence:
    """Coefficient sequence with certificate |h(l)| <= (1+1/lam) sqrt(2 rho) l^{3/2} e^{-rho l}."""
    lam, rho = w.lam, w.rho

    def coeff(l):
        return (lam + l) / lam * np.sqrt(2 * rho * l) * np.exp(-rho * l)

    return CoefficientSequence(coeff, rho, (1 + 1 / lam) * math.sqrt(2 * rho), 1.5)


@lru_cache(maxsize=None)
def a_closed_form(n: int) -> QRational:
    lam = Fraction(n - 1, 2)
    return s_closed_form(n, 2) / lam + s_closed_form(n, 1)


@lru_cache(maxsize=None)
def c_closed_form(n: int) -> QRational:
    lam = Fraction(n - 1, 2)
    return s_closed_form(n, 4) / lam + 3 * s_closed_form(n, 3) + 2 * lam * s_closed_form(n, 2)


def _eval_q(r: QRational, rho: float) -> float:
    return qrational_eval(r, math.exp(-2 * rho), -math.expm1(-2 * rho))


def b_series(w: AbelPoissonWavelet, tol: float = COEFF_TOL):
    """B(rho) summed with a certified relative tail below ``tol``."""
    lam, rho = w.lam, w.rho
    twice = 2 * lam

    def term(l):
        return (l + twice) / lam * binomial_weights(l, lam) * np.sqrt(l * (l + 1)) * np.exp(-2 * rho * l)

    q = math.exp(-2 * rho)

    def ratio(L):
        L = max(L, 1)
        # binomial, (l+2lam) and sqrt(l(l+1)) ratios, each nonincreasing in l
        return q * (L + twice) / (L + 1) * (L + 1 + twice) / (L + twice) * math.sqrt((L + 2) / L)

    return certified_sum(term, tol, ratio_bound=ratio, start=1, relative=True)


def ap_abc(w: AbelPoissonWavelet, tol: float = COEFF_TOL) -> ABCValues:
    a = _eval_q(a_closed_form(w.n), w.rho)
    c = _eval_q(c_closed_form(w.n), w.rho)
    b = b_series(w, tol)
    rounding = 16 * _EPS
    return ABCValues(a, b.value, c, rounding * a, b.tail_bound + rounding * b.value * math.sqrt(b.terms_used), rounding * c)


def ap_var_space(w: AbelPoissonWavelet, tol: float = COEFF_TOL) -> float:
    abc = ap_abc(w, tol)
    ratio = math.exp(w.rho) * abc.a / abc.b
    return (ratio - 1) * (ratio + 1)


def ap_var_momentum_closed(w: AbelPoissonWavelet) -> float:
    """var_M = n(n+1)[n + (n+3)E + E^2] E / ([n-1 + (n+1)E] (E-1)^2), E = exp(2 rho)."""
    n = w.n
    big_e = math.exp(2 * w.rho)
    em1 = math.expm1(2 * w.rho)
    return n * (n + 1) * (n + (n + 3) * big_e + big_e**2) * big_e / ((n - 1 + (n + 1) * big_e) * em1**2)


def ap_var_momentum_series(w: AbelPoissonWavelet) -> float:
    """C/A from the exact S_{n,m} closed forms."""
    return _eval_q(c_closed_form(w.n) / a_closed_form(w.n), w.rho)


def ap_uncertainty(w: AbelPoissonWavelet, tol: float = COEFF_TOL) -> float:
    return math.sqrt(ap_var_space(w, tol) * ap_var_momentum_closed(w))


def ap_limit_uncertainty(n: int) -> float:
    """Limit of U as rho -> 0: sqrt((n+1)(n+2)(n^2-3n+3) / (n(n-1))) / 2."""
    Lambda(n)
    return 0.5 * math.sqrt((n + 1) * (n + 2) * (n * n - 3 * n + 3) / (n * (n - 1)))


def ap_asymptotics(n: int, rho: float) -> tuple[float, float]:
    """Small-rho predictions: leading var_S term and two-term var_M."""
    Lambda(n)
    if not rho > 0:
        raise ValueError(f"rho must be positive, got {rho}")
    var_s = (n * n - 3 * n + 3) / (n * (n - 1)) * rho**2
    var_m = (n * n + 3 * n + 2) / (4 * rho**2) + (n * n - 1) / (2 * n * rho)
    return var_s, var_m


def _minus1_series(n: int, rho: float, tol: float) -> float:
    if n == 2:
        return s2_minus1_closed(rho)
    return s_numeric(SeriesIndex(n, -1, rho), tol, relative=True).value


def ap_rest_term(n: int, rho: float, tol: float = COEFF_TOL, *, strict: bool = True) -> RestTerm:
    """R = B - [S_2/lam + (1/(2lam)+2) S_1 + (1-1/(8lam)) S_0] and the bound S_{n,-1}/4.

    Raises :class:`BoundViolationError` if |R| exceeds the bound by more than
    the numerical error of the subtraction.
    """
    w = AbelPoissonWavelet(n, rho)
    lam = w.lam
    b = b_series(w, tol)
    s0, s1, s2 = (s_closed_eval(n, m, rho) for m in range(3))
    main = s2 / lam + (1 / (2 * lam) + 2) * s1 + (1 - 1 / (8 * lam)) * s0
    r = b.value - main
    err = b.tail_bound + 16 * _EPS * (b.value * math.sqrt(b.terms_used) + main)
    bound = 0.25 * _minus1_series(n, rho, tol)
    rest = RestTerm(r, bound, err, b.value, main)
    if strict and abs(r) > bound + err:
        raise BoundViolationError(
            f"|R({rho})| = {abs(r)!r} > S_{n},-1/4 = {bound!r} (B={b.value!r}, main={main!r}, err={err:.3g})"
        )
    return rest


def ap_alpha_extract(n: int, rho: float, tol: float = COEFF_TOL) -> float:
    """The bounded function alpha(rho) of the closed var_S form.

    The closed form takes S_0 as (1-q)^{1-n} instead of (1-q)^{1-n} - 1, so
    its rest term is R - (1 - 1/(8 lam)); alpha is that rest term times
    rho^(n-2).  With this alpha, :func:`var_space_rest_form` reproduces
    :func:`ap_var_space`.
    """
    lam = (n - 1) / 2
    rest = ap_rest_term(n, rho, tol)
    return (rest.r - (1 - 1 / (8 * lam))) * rho ** (n - 2)


def var_space_rest_form(n: int, rho: float, alpha: float) -> float:
    """The closed var_S expression in rho, e^{2 rho} and the rest function alpha."""
    Lambda(n)
    big_e = math.exp(2 * rho)
    omq_n = (-math.expm1(-2 * rho)) ** n
    rn = rho**n
    d = (
        rn
        + 2 * (2 * (n - 1) * omq_n * alpha * rho**2 - (4 * n * n - 6 * n + 3) * rn) * big_e
        - (4 * (n - 1) * omq_n * alpha * rho**2 + (4 * n - 5) * rn) * big_e**2
    )
    top = 16 * (n - 1) ** 2 * (n - 1 + (n + 1) * big_e) ** 2 * rho ** (2 * n) * big_e
    return top / d**2 - 1
