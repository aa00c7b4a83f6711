"""Scalar special functions: Gegenbauer polynomials, binomials, Gamma(0, x).

Gegenbauer polynomials use the standard normalization

    C_l^lam(1) = binom(l + 2*lam - 1, l),

so for ``lam = 1/2`` they are the Legendre polynomials.  Other conventions
(e.g. unit value at t = 1) exist; every variance formula in this package
assumes this one.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

EULER_GAMMA = 0.57721566490153286061

# largest argument of exp() that does not overflow a double
_LOG_MAX = math.log(np.finfo(float).max)

GAMMA0_SWITCH = 1.5


@dataclass(frozen=True)
class Lambda:
    """Sphere dimension ``n`` together with the Gegenbauer index (n-1)/2."""

    n: int

    def __post_init__(self):
        if isinstance(self.n, bool) or not isinstance(self.n, (int, np.integer)):
            raise TypeError(f"sphere dimension must be an integer, got {self.n!r}")
        if self.n < 2:
            raise ValueError(f"sphere dimension must be >= 2, got {self.n}")

    @property
    def lam(self) -> float:
        return (self.n - 1) / 2

    @property
    def twice_lam(self) -> int:
        return self.n - 1

    @classmethod
    def from_lam(cls, lam: float) -> "Lambda":
        twice = 2 * lam
        if twice != int(twice):
            raise ValueError(f"lambda must be a half-integer, got {lam}")
        return cls(int(twice) + 1)


def _check_lam(lam: float) -> float:
    lam = float(lam)
    if not lam > 0:
        raise ValueError(f"Gegenbauer order must be positive, got {lam}")
    return lam


def gegenbauer_eval(l: int, lam: float, t):
    """C_l^lam(t) by the three-term recurrence.

    Accepts scalar or array ``t``; arrays are evaluated elementwise.
    """
    lam = _check_lam(lam)
    if l < 0:
        raise ValueError(f"degree must be nonnegative, got {l}")
    t_arr = np.asarray(t, dtype=float)
    if np.any(np.abs(t_arr) > 1):
        raise ValueError("Gegenbauer argument must satisfy |t| <= 1")
    c_prev = np.ones_like(t_arr)
    if l == 0:
        return c_prev if t_arr.ndim else float(c_prev)
    c_cur = 2 * lam * t_arr
    for k in range(2, l + 1):
        c_prev, c_cur = c_cur, (2 * (k + lam - 1) * t_arr * c_cur - (k + 2 * lam - 2) * c_prev) / k
    return c_cur if t_arr.ndim else float(c_cur)


def gegenbauer_table(degree: int, lam: float, t: np.ndarray) -> np.ndarray:
    """Rows C_0^lam(t), ..., C_degree^lam(t) stacked into a (degree+1, len(t)) array."""
    lam = _check_lam(lam)
    t = np.asarray(t, dtype=float)
    out = np.empty((degree + 1,) + t.shape)
    out[0] = 1.0
    if degree >= 1:
        out[1] = 2 * lam * t
    for k in range(2, degree + 1):
        out[k] = (2 * (k + lam - 1) * t * out[k - 1] - (k + 2 * lam - 2) * out[k - 2]) / k
    return out


def gen_binomial(l: int, lam: float) -> float:
    """binom(l + 2*lam - 1, l) = Gamma(l + 2 lam) / (Gamma(l + 1) Gamma(2 lam)).

    Evaluated through log-gamma. Raises OverflowError instead of returning inf.
    """
    lam = _check_lam(lam)
    if l < 0:
        raise ValueError(f"degree must be nonnegative, got {l}")
    log_val = math.lgamma(l + 2 * lam) - math.lgamma(l + 1) - math.lgamma(2 * lam)
    if log_val > _LOG_MAX:
        raise OverflowError(f"binom({l}+2*{lam}-1, {l}) exceeds double range")
    return math.exp(log_val)


def gen_binomial_exact(l: int, lam: float) -> int:
    """Integer path of :func:`gen_binomial`; requires 2*lam to be an integer."""
    lam = _check_lam(lam)
    twice = 2 * lam
    if twice != int(twice):
        raise ValueError(f"exact binomial needs integer 2*lam, got lam={lam}")
    return math.comb(l + int(twice) - 1, l)


def binomial_weights(l, lam: float) -> np.ndarray:
    """Vectorized binom(l + 2*lam - 1, l) over an integer array ``l``.

    For integer 2*lam the value is the polynomial prod_{j=1}^{2lam-1} (l+j)/j,
    which keeps full double accuracy for large l where log-gamma differences
    lose digits.
    """
    lam = _check_lam(lam)
    l = np.asarray(l, dtype=float)
    twice = 2 * lam
    if twice == int(twice):
        out = np.ones_like(l)
        for j in range(1, int(twice)):
            out *= (l + j) / j
        return out
    from scipy.special import gammaln

    return np.exp(gammaln(l + twice) - gammaln(l + 1) - gammaln(twice))


def _e1_series(x: float) -> float:
    # E1(x) = -gamma - ln x - sum_{k>=1} (-x)^k / (k * k!)
    total = 0.0
    term = 1.0
    for k in range(1, 200):
        term *= -x / k
        contrib = term / k
        total += contrib
        if abs(contrib) < 1e-17 * abs(total):
            break
    return -EULER_GAMMA - math.log(x) - total


def _e1_continued_fraction(x: float) -> float:
    # modified Lentz on E1(x) = e^{-x} / (x + 1 - 1^2/(x + 3 - 2^2/(x + 5 - ...)))
    tiny = 1e-300
    b = x + 1.0
    c = 1.0 / tiny
    d = 1.0 / b
    h = d
    for i in range(1, 500):
        a = -float(i * i)
        b += 2.0
        d = 1.0 / (a * d + b)
        c = b + a / c
        delta = c * d
        h *= delta
        if abs(delta - 1.0) < 1e-16:
            break
    else:
        raise ArithmeticError(f"continued fraction for Gamma(0, {x}) did not converge")
    return h * math.exp(-x)


def gamma0(x: float) -> float:
    """Upper incomplete gamma Gamma(0, x) = E1(x) for x > 0."""
    x = float(x)
    if not x > 0:
        raise ValueError(f"Gamma(0, x) requires x > 0, got {x}")
    if x <= GAMMA0_SWITCH:
        return _e1_series(x)
    return _e1_continued_fraction(x)


def sqrt_sandwich_violations(l_max: int) -> list[int]:
    """Degrees l in [1, l_max] violating

        l + 1/2 - 1/(8l) <= sqrt(l(l+1)) <= l + 1/2 - 1/(8l) + 1/(16 l^2).

    Near l = 10^6 the gaps are ~1e-14, below double rounding, so both sides
    are squared over common denominators and compared in exact integers.
    """
    bad = []
    for l in range(1, l_max + 1):
        prod = l * (l + 1)
        low = 8 * l * l + 4 * l - 1  # lower bound times 8l
        high = 16 * l**3 + 8 * l * l - 2 * l + 1  # upper bound times 16 l^2
        if low * low > 64 * l * l * prod or high * high < 256 * l**4 * prod:
            bad.append(l)
    return bad
