"""The series S_{n,m}(rho) = sum_{l>=1} binom(l+2lam-1, l) l^m exp(-2 rho l).

Two independent routes are provided:

* :func:`s_numeric` sums the terms directly and returns a rigorous bound on
  the discarded tail (geometric majorant from a monotone ratio bound);
* :func:`s_closed_form` builds the exact rational function R_{n,m}(q),
  q = exp(-2 rho), from R_{n,0} = (1-q)^{1-n} - 1 by applying q d/dq
  m times, in exact rational arithmetic.

Since d/drho = -2 q d/dq, one application of q d/dq is the same as the
recurrence S_{n,m+1} = -S'_{n,m}/2.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Callable, Optional, Sequence

import numpy as np

from .special_fn import Lambda, binomial_weights, gamma0

RHO_FLOOR = 1e-8
MAX_TERMS = 20_000_000


class SummationError(ArithmeticError):
    """The tail of a series could not be certified within the term budget."""


class PoleProximityError(ZeroDivisionError):
    """A rational function was evaluated too close to a zero of its denominator."""


class BoundViolationError(AssertionError):
    """A proven inequality failed numerically."""


@dataclass(frozen=True)
class SummationResult:
    value: float
    tail_bound: float
    terms_used: int

    def __post_init__(self):
        if not self.tail_bound >= 0:
            raise ValueError(f"tail bound must be nonnegative, got {self.tail_bound}")

    @property
    def interval(self) -> tuple[float, float]:
        return self.value - self.tail_bound, self.value + self.tail_bound


@dataclass(frozen=True)
class SeriesIndex:
    n: int
    m: int
    rho: float

    def __post_init__(self):
        Lambda(self.n)
        if self.m < -1:
            raise ValueError(f"series power m must be >= -1, got {self.m}")
        if not self.rho > 0:
            raise ValueError(f"rho must be positive, got {self.rho}")

    @property
    def lam(self) -> float:
        return (self.n - 1) / 2

    @property
    def q(self) -> float:
        return math.exp(-2 * self.rho)


def certified_sum(
    term: Callable[[np.ndarray], np.ndarray],
    tol: float,
    *,
    majorant: Optional[Callable[[np.ndarray], np.ndarray]] = None,
    ratio_bound: Callable[[int], float],
    start: int = 0,
    relative: bool = False,
    support: Optional[int] = None,
    atol: float = 0.0,
    max_terms: int = MAX_TERMS,
) -> SummationResult:
    """Sum ``term(l)`` for l = start, start+1, ... with a certified tail.

    ``majorant(l) >= |term(l)|`` must hold for every l, and ``ratio_bound(L)``
    must bound majorant(l+1)/majorant(l) for *all* l >= L.  Once that bound r
    is below one, the tail after index L is at most majorant(L) r / (1 - r).
    Summation stops when the tail is below ``tol`` (times the running sum if
    ``relative``) or below ``atol``.  ``support`` is the last possibly
    nonzero index, if known.
    """
    if not tol > 0:
        raise ValueError(f"tolerance must be positive, got {tol}")
    majorant = majorant or (lambda l: np.abs(term(l)))
    chunk_sums: list[float] = []
    lo = start
    chunk = 64
    while True:
        hi = lo + chunk
        if support is not None:
            hi = min(hi, support + 1)
        ls = np.arange(lo, hi, dtype=float)
        chunk_sums.append(math.fsum(term(ls)))
        last = hi - 1
        total = math.fsum(chunk_sums)
        if support is not None and last >= support:
            return SummationResult(total, 0.0, hi - start)
        r = ratio_bound(last)
        if r < 1:
            tail = float(majorant(np.array([float(last)]))[0]) * r / (1 - r)
            threshold = max(tol * abs(total) if relative else tol, atol)
            if tail <= threshold:
                return SummationResult(total, tail, hi - start)
        if hi - start >= max_terms:
            raise SummationError(
                f"tail not certified after {hi - start} terms (ratio bound {r:.6g})"
            )
        lo = hi
        chunk = min(2 * chunk, 1 << 16)


def _s_term(n: int, m: int, rho: float) -> Callable[[np.ndarray], np.ndarray]:
    lam = (n - 1) / 2

    def term(l: np.ndarray) -> np.ndarray:
        return binomial_weights(l, lam) * l**m * np.exp(-2 * rho * l)

    return term


def _s_ratio_bound(n: int, m: int, rho: float) -> Callable[[int], float]:
    # a_{l+1}/a_l = (l+2lam)/(l+1) * ((l+1)/l)^m * q; both factors are
    # nonincreasing in l for 2lam >= 1, and ((l+1)/l)^m <= 1 when m < 0.
    twice_lam = n - 1
    q = math.exp(-2 * rho)

    def bound(L: int) -> float:
        L = max(L, 1)
        r = q * (L + twice_lam) / (L + 1)
        if m > 0:
            r *= ((L + 1) / L) ** m
        return r

    return bound


def s_numeric(idx: SeriesIndex, tol: float = 1e-12, *, relative: bool = False) -> SummationResult:
    """Truncated S_{n,m}(rho) with a certified tail below ``tol``."""
    if idx.rho < RHO_FLOOR:
        raise SummationError(
            f"rho={idx.rho} is below the numeric floor {RHO_FLOOR}; use the closed form"
        )
    term = _s_term(idx.n, idx.m, idx.rho)
    return certified_sum(
        term, tol, ratio_bound=_s_ratio_bound(idx.n, idx.m, idx.rho), start=1, relative=relative
    )


# --- exact polynomials over Q, ascending coefficient tuples -------------------

Poly = tuple[Fraction, ...]


def _trim(p: Sequence[Fraction]) -> Poly:
    p = list(p)
    while p and p[-1] == 0:
        p.pop()
    return tuple(p)


def _padd(a: Poly, b: Poly) -> Poly:
    size = max(len(a), len(b))
    return _trim(
        [(a[i] if i < len(a) else 0) + (b[i] if i < len(b) else 0) for i in range(size)]
    )


def _pscale(a: Poly, c) -> Poly:
    return _trim([x * c for x in a])


def _pmul(a: Poly, b: Poly) -> Poly:
    if not a or not b:
        return ()
    out = [Fraction(0)] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                out[i + j] += x * y
    return _trim(out)


def _pderiv(a: Poly) -> Poly:
    return _trim([i * a[i] for i in range(1, len(a))])


def _pdivmod(a: Poly, b: Poly) -> tuple[Poly, Poly]:
    if not b:
        raise ZeroDivisionError("polynomial division by zero")
    rem = list(a)
    quot = [Fraction(0)] * max(len(a) - len(b) + 1, 0)
    lead = b[-1]
    for shift in range(len(a) - len(b), -1, -1):
        c = rem[shift + len(b) - 1] / lead
        quot[shift] = c
        if c:
            for j, y in enumerate(b):
                rem[shift + j] -= c * y
    return _trim(quot), _trim(rem[: len(b) - 1])


def _pgcd(a: Poly, b: Poly) -> Poly:
    while b:
        a, b = b, _pdivmod(a, b)[1]
    return _pscale(a, 1 / a[-1]) if a else a


def _one_minus_q_power(k: int) -> Poly:
    return tuple(Fraction((-1) ** i * math.comb(k, i)) for i in range(k + 1))


@dataclass(frozen=True)
class QRational:
    """Exact rational function num(q)/den(q) with rational coefficients.

    Kept reduced: gcd(num, den) = 1 and den normalized to constant term 1
    (leading coefficient 1 if den(0) = 0).  For the S_{n,m} closed forms
    this makes den exactly (1-q)^k.
    """

    num: Poly
    den: Poly = (Fraction(1),)
    pole_order: Optional[int] = field(default=None, compare=False, init=False)

    def __post_init__(self):
        num = _trim(Fraction(c) for c in self.num)
        den = _trim(Fraction(c) for c in self.den)
        if not den:
            raise ZeroDivisionError("denominator is identically zero")
        g = _pgcd(num, den) if num else (Fraction(1),)
        if len(g) > 1:
            num = _pdivmod(num, g)[0]
            den = _pdivmod(den, g)[0]
        if not num:
            den = (Fraction(1),)
        scale = den[0] if den[0] != 0 else den[-1]
        num = _pscale(num, 1 / scale)
        den = _pscale(den, 1 / scale)
        object.__setattr__(self, "num", num)
        object.__setattr__(self, "den", den)
        k = len(den) - 1
        object.__setattr__(self, "pole_order", k if den == _one_minus_q_power(k) else None)

    @classmethod
    def constant(cls, c) -> "QRational":
        return cls((Fraction(c),))

    def __add__(self, other) -> "QRational":
        if not isinstance(other, QRational):
            other = QRational.constant(other)
        return QRational(
            _padd(_pmul(self.num, other.den), _pmul(other.num, self.den)),
            _pmul(self.den, other.den),
        )

    __radd__ = __add__

    def __neg__(self) -> "QRational":
        return QRational(_pscale(self.num, -1), self.den)

    def __sub__(self, other) -> "QRational":
        return self + (-other if isinstance(other, QRational) else -Fraction(other))

    def __mul__(self, other) -> "QRational":
        if isinstance(other, QRational):
            return QRational(_pmul(self.num, other.num), _pmul(self.den, other.den))
        return QRational(_pscale(self.num, Fraction(other)), self.den)

    __rmul__ = __mul__

    def __truediv__(self, other) -> "QRational":
        if isinstance(other, QRational):
            if not other.num:
                raise ZeroDivisionError("division by the zero rational function")
            return QRational(_pmul(self.num, other.den), _pmul(self.den, other.num))
        return QRational(_pscale(self.num, 1 / Fraction(other)), self.den)

    def derivative(self) -> "QRational":
        """d/dq."""
        top = _padd(_pmul(_pderiv(self.num), self.den), _pscale(_pmul(self.num, _pderiv(self.den)), -1))
        return QRational(top, _pmul(self.den, self.den))

    def q_derivative(self) -> "QRational":
        """q * d/dq, i.e. -1/2 d/drho under q = exp(-2 rho)."""
        d = self.derivative()
        return QRational(_pmul((Fraction(0), Fraction(1)), d.num), d.den)

    def __str__(self) -> str:
        return canonical_string(self)


def _format_poly(p: Poly) -> str:
    if not p:
        return "0"
    parts = []
    for i, c in enumerate(p):
        if c == 0:
            continue
        sign = "-" if c < 0 else "+"
        mag = abs(c)
        mono = "" if i == 0 else ("q" if i == 1 else f"q^{i}")
        if mag == 1 and mono:
            body = mono
        elif mag.denominator == 1:
            body = f"{mag.numerator}{mono}"
        else:
            body = f"({mag}){mono}"
        parts.append((sign, body))
    out = ("-" if parts[0][0] == "-" else "") + parts[0][1]
    for sign, body in parts[1:]:
        out += f" {sign} {body}"
    return out


def canonical_string(r: QRational) -> str:
    """'P(q) / (1-q)^k', coefficients in ascending degree order.

    A multi-term numerator is parenthesized; a denominator that is not a
    power of (1-q) is printed as a parenthesized polynomial.
    """
    num = _format_poly(r.num)
    if sum(1 for c in r.num if c) > 1:
        num = f"({num})"
    if r.pole_order is not None:
        den = f"(1-q)^{r.pole_order}"
    else:
        den = f"({_format_poly(r.den)})"
    return f"{num} / {den}"


@lru_cache(maxsize=None)
def s_closed_form(n: int, m: int) -> QRational:
    """Exact R_{n,m}(q) with S_{n,m}(rho) = R_{n,m}(exp(-2 rho))."""
    Lambda(n)
    if m < 0:
        raise ValueError(f"closed forms exist only for m >= 0, got {m}")
    if m == 0:
        k = n - 1
        # (1-q)^{1-n} - 1 = (1 - (1-q)^k) / (1-q)^k
        return QRational(_padd((Fraction(1),), _pscale(_one_minus_q_power(k), -1)), _one_minus_q_power(k))
    return s_closed_form(n, m - 1).q_derivative()


def _horner(p: Poly, q: float) -> float:
    acc = 0.0
    for c in reversed(p):
        acc = acc * q + float(c)
    return acc


def qrational_eval(r: QRational, q: float, one_minus_q: Optional[float] = None) -> float:
    """Evaluate ``r`` at ``q`` in [0, 1).

    The numerator uses Horner's scheme.  A denominator of the form (1-q)^k is
    evaluated in factored form, optionally from a caller-supplied accurate
    ``one_minus_q`` (e.g. ``-expm1(-2*rho)``); expanding it would lose all
    digits near q = 1.  Other denominators use Horner and raise
    :class:`PoleProximityError` when |den(q)| is within the rounding bound
    64*eps*sum|c_i q^i|.
    """
    if not 0 <= q < 1:
        raise ValueError(f"q must lie in [0, 1), got {q}")
    num = _horner(r.num, q)
    if r.pole_order is not None:
        omq = (1 - q) if one_minus_q is None else one_minus_q
        if omq <= 0:
            raise PoleProximityError(f"1-q = {omq} at a pole of order {r.pole_order}")
        return num / omq**r.pole_order
    den = _horner(r.den, q)
    scale = sum(abs(float(c)) * q**i for i, c in enumerate(r.den))
    if abs(den) <= 64 * np.finfo(float).eps * scale:
        raise PoleProximityError(f"denominator {den:.3g} indistinguishable from 0 at q={q}")
    return num / den


def s_closed_eval(n: int, m: int, rho: float) -> float:
    """S_{n,m}(rho) from the exact closed form, with accurate 1-q for small rho."""
    if not rho > 0:
        raise ValueError(f"rho must be positive, got {rho}")
    return qrational_eval(s_closed_form(n, m), math.exp(-2 * rho), -math.expm1(-2 * rho))


def s2_minus1_closed(rho: float) -> float:
    """S_{2,-1}(rho) = sum_{l>=1} exp(-2 rho l)/l = -ln(1 - exp(-2 rho))."""
    if not rho > 0:
        raise ValueError(f"rho must be positive, got {rho}")
    return -math.log(-math.expm1(-2 * rho))


@dataclass
class MinusOneBoundReport:
    n: int
    rho: float
    s2_minus1: float
    upper: float
    holds: bool
    # (rho, S_{n,-1}(rho) * rho^(n-2)) along a halving ladder; empty for n = 2
    scaled_ladder: list[tuple[float, float]] = field(default_factory=list)
    ladder_constant: Optional[float] = None
    violations: list[str] = field(default_factory=list)


def s_minus1_bound_check(n: int, rho: float, *, ladder: int = 5, strict: bool = True) -> MinusOneBoundReport:
    """Check 0 <= S_{2,-1}(rho) <= exp(-2 rho) + Gamma(0, 2 rho).

    For n > 2 also sums S_{n,-1} along rho, rho/2, ..., and checks that
    S_{n,-1}(r) r^(n-2) stays below twice its value at the top of the ladder,
    which an extra 1/r divergence would break within two halvings.
    """
    Lambda(n)
    if not rho > 0:
        raise ValueError(f"rho must be positive, got {rho}")
    s = s2_minus1_closed(rho)
    upper = math.exp(-2 * rho) + gamma0(2 * rho)
    violations = []
    if not (0 <= s <= upper):
        violations.append(f"S_2,-1({rho}) = {s!r} outside [0, {upper!r}]")
    report = MinusOneBoundReport(n, rho, s, upper, True)
    if n > 2:
        for k in range(ladder):
            r = rho / 2**k
            val = s_numeric(SeriesIndex(n, -1, r), 1e-10, relative=True).value
            report.scaled_ladder.append((r, val * r ** (n - 2)))
        report.ladder_constant = 2 * report.scaled_ladder[0][1]
        for r, v in report.scaled_ladder:
            if v > report.ladder_constant:
                violations.append(f"S_{n},-1({r}) * rho^{n - 2} = {v!r} exceeds {report.ladder_constant!r}")
    report.violations = violations
    report.holds = not violations
    if strict and violations:
        raise BoundViolationError("; ".join(violations))
    return report
