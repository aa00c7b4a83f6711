"""Space/momentum variances and the uncertainty product of zonal functions.

A zonal function on S^n is given by its Gegenbauer coefficients,
f(cos theta) = sum_l h(l) C_l^lam(cos theta), lam = (n-1)/2.  Two independent
routes compute the variances:

* the coefficient route sums weighted series of h(l) (orthogonality of the
  C_l^lam and the eigenvalue -l(l+2lam) of the Laplace-Beltrami operator);
* the quadrature route integrates the defining surface integrals in theta,
  differentiating the truncated expansion term by term.

Coefficients are real, so the cross term h(l) conj h(l+1) + c.c. is
2 h(l) h(l+1).
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from enum import Enum
from typing import Callable, Optional

import numpy as np

from .qseries import SummationResult, certified_sum
from .special_fn import Lambda, binomial_weights, gegenbauer_table

COEFF_TOL = 1e-12
QUAD_TOL = 1e-8
EDGE_CUTOFF = 1e-6
PANEL_BUDGET = 1 << 20
GL_NODES = 20
SPOT_CHECK_DEGREE = 10_000
_EPS = np.finfo(float).eps


class CenterOfMassZeroError(ZeroDivisionError):
    """The x-moment of |f|^2 vanishes, so var_S is undefined."""


class QuadratureError(ArithmeticError):
    """Adaptive quadrature did not converge within the panel budget."""


@dataclass(frozen=True)
class CoefficientSequence:
    """Real Gegenbauer coefficients with a decay certificate.

    ``coeff`` maps an integer array of degrees to coefficients.  The
    certificate promises |h(l)| <= scale * max(l, 1)^power * exp(-decay*l)
    for every l; it is spot-checked up to degree 10^4 at construction.
    ``support`` is the largest degree that may be nonzero, if finite.
    """

    coeff: Callable[[np.ndarray], np.ndarray]
    decay: float
    scale: float
    power: float = 0.0
    support: Optional[int] = None

    def __post_init__(self):
        if not self.decay > 0:
            raise ValueError(f"decay rate must be positive, got {self.decay}")
        if not self.scale >= 0:
            raise ValueError(f"scale must be nonnegative, got {self.scale}")
        top = SPOT_CHECK_DEGREE if self.support is None else min(self.support, SPOT_CHECK_DEGREE)
        ls = np.arange(top + 1, dtype=float)
        vals = np.abs(self(ls))
        bound = self.majorant(ls)
        bad = np.nonzero(vals > bound * (1 + 1e-12) + 1e-300)[0]
        if bad.size:
            l0 = int(bad[0])
            raise ValueError(f"decay certificate fails at l={l0}: |h|={vals[l0]:.6g} > {bound[l0]:.6g}")

    def __call__(self, l) -> np.ndarray:
        l = np.asarray(l, dtype=float)
        out = np.asarray(self.coeff(l), dtype=float)
        if self.support is not None:
            out = np.where(l <= self.support, out, 0.0)
        return out

    def majorant(self, l) -> np.ndarray:
        l = np.asarray(l, dtype=float)
        return self.scale * np.maximum(l, 1.0) ** self.power * np.exp(-self.decay * l)

    def scaled(self, c: float) -> "CoefficientSequence":
        return CoefficientSequence(
            lambda l: c * self.coeff(l), self.decay, abs(c) * self.scale, self.power, self.support
        )

    @classmethod
    def from_values(cls, values) -> "CoefficientSequence":
        """Finitely supported sequence h(0), ..., h(L)."""
        values = np.asarray(values, dtype=float)
        support = len(values) - 1
        ls = np.arange(len(values))
        scale = float(np.max(np.abs(values) * np.exp(ls))) if len(values) else 0.0

        def coeff(l):
            idx = np.asarray(l, dtype=int)
            inside = (idx >= 0) & (idx <= support)
            return np.where(inside, values[np.clip(idx, 0, support)], 0.0)

        return cls(coeff, 1.0, scale, 0.0, support)

    @classmethod
    def single_mode(cls, degree: int, value: float = 1.0) -> "CoefficientSequence":
        vals = np.zeros(degree + 1)
        vals[degree] = value
        return cls.from_values(vals)


class Path(str, Enum):
    COEFFICIENT_LEMMA = "coefficient_lemma"
    QUADRATURE = "quadrature"


@dataclass(frozen=True)
class LocalizationReport:
    n: int
    var_space: float
    var_momentum: float
    uncertainty: float
    path: Path
    error_estimate: float

    @property
    def lower_bound_margin(self) -> float:
        """U - n/2; the uncertainty principle asserts this is >= -error_estimate."""
        return self.uncertainty - self.n / 2


# --- coefficient route --------------------------------------------------------


def _ratio_sup(decay: float, power: float, shifts_up: tuple[float, ...], binom_twice_lam: float) -> Callable[[int], float]:
    # Bounds w(l+1)/w(l) for all l >= L for weights of the form
    # binom(l + b - 1, l) * prod_i (l + s_i) * max(l,1)^(2 power) * exp(-2 decay l),
    # every factor having a nonincreasing ratio; factors with ratio <= 1 are dropped.
    q = math.exp(-2 * decay)

    def bound(L: int) -> float:
        L = max(L, 1)
        r = q
        if binom_twice_lam > 1:
            r *= (L + binom_twice_lam) / (L + 1)
        for s in shifts_up:
            r *= (L + 1 + s) / (L + s)
        if power > 0:
            r *= ((L + 1) / L) ** (2 * power)
        return r

    return bound


def _norm_series(seq: CoefficientSequence, lam: float, tol: float) -> SummationResult:
    # sum lam/(l+lam) binom(l+2lam-1, l) h(l)^2
    def weight(l):
        return lam / (l + lam) * binomial_weights(l, lam)

    return certified_sum(
        lambda l: weight(l) * seq(l) ** 2,
        tol,
        majorant=lambda l: weight(l) * seq.majorant(l) ** 2,
        ratio_bound=_ratio_sup(seq.decay, seq.power, (), 2 * lam),
        relative=True,
        support=seq.support,
    )


def _moment_series(seq: CoefficientSequence, lam: float, tol: float, norm: float) -> SummationResult:
    # |moment| <= norm (Cauchy-Schwarz), which caps the work when the moment vanishes
    # sum binom(l+2lam, l) lam^2 * 2 h(l) h(l+1) / ((l+lam)(l+lam+1))
    def weight(l):
        return binomial_weights(l, lam + 0.5) * lam**2 * 2 / ((l + lam) * (l + lam + 1))

    return certified_sum(
        lambda l: weight(l) * seq(l) * seq(l + 1),
        tol,
        majorant=lambda l: weight(l) * seq.majorant(l) * seq.majorant(l + 1),
        ratio_bound=_ratio_sup(seq.decay, seq.power, (), 2 * lam + 1),
        relative=True,
        support=seq.support,
        atol=tol * 1e-3 * abs(norm),
    )


def _energy_series(seq: CoefficientSequence, lam: float, tol: float) -> SummationResult:
    # sum l (l+2lam) lam/(l+lam) binom(l+2lam-1, l) h(l)^2
    def weight(l):
        return l * (l + 2 * lam) * lam / (l + lam) * binomial_weights(l, lam)

    return certified_sum(
        lambda l: weight(l) * seq(l) ** 2,
        tol,
        majorant=lambda l: weight(l) * seq.majorant(l) ** 2,
        ratio_bound=_ratio_sup(seq.decay, seq.power, (0.0, 2 * lam), 2 * lam),
        relative=True,
        support=seq.support,
    )


def _clamp_var_space(value: float, tol: float) -> float:
    if value < 0:
        if value > -tol:
            warnings.warn(f"var_S = {value:.3g} clamped to 0 (rounding noise)", RuntimeWarning)
            return 0.0
        raise ArithmeticError(f"var_S = {value!r} is negative beyond tolerance")
    return value


def _var_space_coeff(seq, lam, tol):
    num = _norm_series(seq, lam, tol)
    den = _moment_series(seq, lam, tol, num.value)
    if abs(den.value) <= max(den.tail_bound, 64 * _EPS * abs(num.value)):
        raise CenterOfMassZeroError(
            f"x-moment {den.value:.3g} is not separated from 0 (tail {den.tail_bound:.3g})"
        )
    ratio = num.value / den.value
    value = _clamp_var_space(ratio * ratio - 1, max(tol, 64 * _EPS))
    rel = num.tail_bound / abs(num.value) + den.tail_bound / abs(den.value) + 8 * _EPS
    return value, 2 * ratio * ratio * rel


def var_space_coeff(seq: CoefficientSequence, lam: float, tol: float = COEFF_TOL) -> float:
    """var_S from the Gegenbauer coefficients: (norm / x-moment)^2 - 1.

    ``tol`` is the relative tail tolerance of each series.
    """
    return _var_space_coeff(seq, lam, tol)[0]


def _var_momentum_coeff(seq, lam, tol):
    norm = _norm_series(seq, lam, tol)
    if norm.value == 0:
        raise ZeroDivisionError("zero-norm coefficient sequence")
    energy = _energy_series(seq, lam, tol)
    value = energy.value / norm.value
    rel = norm.tail_bound / norm.value + (energy.tail_bound / energy.value if energy.value else 0) + 8 * _EPS
    return value, value * rel


def var_momentum_coeff(seq: CoefficientSequence, lam: float, tol: float = COEFF_TOL) -> float:
    """var_M = sum l(l+2lam) w_l h(l)^2 / sum w_l h(l)^2, w_l = lam/(l+lam) binom(l+2lam-1, l)."""
    return _var_momentum_coeff(seq, lam, tol)[0]


def _combine(n, vs, vs_err, vm, vm_err, path) -> LocalizationReport:
    u = math.sqrt(vs * vm)
    if u > 0:
        err = 0.5 * u * ((vs_err / vs if vs else 0) + (vm_err / vm if vm else 0))
    else:
        err = math.sqrt(vs_err * vm + vs * vm_err + vs_err * vm_err)
    return LocalizationReport(n, vs, vm, u, path, err)


def uncertainty_product(seq: CoefficientSequence, lam: float, tol: float = COEFF_TOL) -> LocalizationReport:
    """Both variances and U = sqrt(var_S * var_M) via the coefficient route."""
    n = Lambda.from_lam(lam).n
    vs, vs_err = _var_space_coeff(seq, lam, tol)
    vm, vm_err = _var_momentum_coeff(seq, lam, tol)
    return _combine(n, vs, vs_err, vm, vm_err, Path.COEFFICIENT_LEMMA)


# --- quadrature route ---------------------------------------------------------


@dataclass(frozen=True)
class ZonalFunction:
    """Truncated expansion f(t) = sum_{l <= degree} h(l) C_l^lam(t)."""

    coefficients: CoefficientSequence
    degree: int
    lam: float

    def __post_init__(self):
        Lambda.from_lam(self.lam)
        if self.degree < 0:
            raise ValueError(f"truncation degree must be nonnegative, got {self.degree}")

    @property
    def n(self) -> int:
        return Lambda.from_lam(self.lam).n

    @classmethod
    def from_sequence(cls, seq: CoefficientSequence, lam: float, tol: float = QUAD_TOL) -> "ZonalFunction":
        """Pick the degree so the dropped modes are negligible against ``tol``.

        The bound used is the certified tail of sum_l |h(l)| C_l(1) (1 + l(l+2lam))^2,
        which dominates the dropped part of f, f', f'' and of every quadratic
        quantity built from them, relative to the retained sum.
        """
        if seq.support is not None:
            return cls(seq, seq.support, lam)

        def weight(l):
            return binomial_weights(l, lam) * (1 + l * (l + 2 * lam)) ** 2

        res = certified_sum(
            lambda l: weight(l) * np.abs(seq(l)),
            min(tol / 10, 1e-3) * 1e-6,
            majorant=lambda l: weight(l) * seq.majorant(l),
            ratio_bound=_ratio_sup(seq.decay / 2, seq.power / 2, (0.0, 2 * lam, 0.0, 2 * lam), 2 * lam),
            relative=True,
        )
        return cls(seq, res.terms_used - 1, lam)

    def _coeffs(self) -> np.ndarray:
        return self.coefficients(np.arange(self.degree + 1, dtype=float))

    def values(self, t: np.ndarray) -> np.ndarray:
        return self._coeffs() @ gegenbauer_table(self.degree, self.lam, t)

    def derivatives(self, t: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """f, df/dt, d2f/dt2 using d/dt C_l^lam = 2 lam C_{l-1}^{lam+1}."""
        h = self._coeffs()
        lam, L = self.lam, self.degree
        f = h @ gegenbauer_table(L, lam, t)
        d1 = np.zeros_like(t)
        d2 = np.zeros_like(t)
        if L >= 1:
            d1 = 2 * lam * (h[1:] @ gegenbauer_table(L - 1, lam + 1, t))
        if L >= 2:
            d2 = 4 * lam * (lam + 1) * (h[2:] @ gegenbauer_table(L - 2, lam + 2, t))
        return f, d1, d2


def _gauss_legendre_panels(a: float, b: float, panels: int) -> tuple[np.ndarray, np.ndarray]:
    x, w = np.polynomial.legendre.leggauss(GL_NODES)
    edges = np.linspace(a, b, panels + 1)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[:-1] + edges[1:])
    nodes = (mid[:, None] + half[:, None] * x[None, :]).ravel()
    weights = (half[:, None] * w[None, :]).ravel()
    return nodes, weights


def adaptive_integrate(
    integrand: Callable[[np.ndarray], np.ndarray],
    a: float,
    b: float,
    tol: float = QUAD_TOL,
    *,
    panels: int = 8,
    budget: int = PANEL_BUDGET,
) -> tuple[np.ndarray, float]:
    """Composite Gauss-Legendre on [a, b], doubling the panel count.

    ``integrand`` maps nodes to a (k, nodes) array so several integrals share
    the refinement.  Stops when every component changes by less than ``tol``
    relative to the largest component; returns (integrals, last change).
    """
    nodes, weights = _gauss_legendre_panels(a, b, panels)
    prev = np.atleast_2d(integrand(nodes)) @ weights
    while panels < budget:
        panels *= 2
        nodes, weights = _gauss_legendre_panels(a, b, panels)
        cur = np.atleast_2d(integrand(nodes)) @ weights
        scale = np.max(np.abs(cur))
        change = float(np.max(np.abs(cur - prev)))
        if change <= tol * scale:
            return cur, change
        prev = cur
    raise QuadratureError(f"no convergence on [{a}, {b}] within {budget} panels")


def _space_moments(f: ZonalFunction, tol: float) -> tuple[float, float, float]:
    n = f.n

    def integrand(theta):
        t = np.cos(theta)
        g = f.values(t) ** 2 * np.sin(theta) ** (n - 1)
        return np.vstack([g, t * g])

    (norm, moment), change = adaptive_integrate(integrand, 0.0, math.pi, tol)
    return norm, moment, change


def var_space_quadrature(f: ZonalFunction, tol: float = QUAD_TOL) -> float:
    """var_S from the surface integrals (int |f|^2 / int x_1 |f|^2)^2 - 1.

    Only the x_1 moment survives for zonal f, and both integrals reduce to
    int_0^pi g(cos theta) sin^(n-1) theta d theta; the sphere-area factor
    cancels.
    """
    return _var_space_quadrature(f, tol)[0]


def _var_space_quadrature(f, tol):
    norm, moment, change = _space_moments(f, tol)
    if abs(moment) <= max(change, tol) * abs(norm):
        raise CenterOfMassZeroError(f"x-moment {moment:.3g} vanishes relative to norm {norm:.3g}")
    ratio = norm / moment
    value = _clamp_var_space(ratio * ratio - 1, tol)
    return value, 2 * ratio * ratio * (change / abs(moment) + change / abs(norm))


def _var_momentum_quadrature(f, tol, cutoff=EDGE_CUTOFF):
    n = f.n

    def integrand(theta):
        t = np.cos(theta)
        s = np.sin(theta)
        F, dF, d2F = f.derivatives(t)
        # theta-derivatives via the chain rule, t = cos(theta)
        f1 = -s * dF
        f2 = s * s * d2F - t * dF
        lap = f2 + (n - 1) * (t / s) * f1
        w = s ** (n - 1)
        return np.vstack([-lap * F * w, F * F * w])

    # |integrand| <= C sin^(n-1) near the poles, so each excluded cap holds about
    # |integrand / sin^(n-1)| * cutoff^n / n; shrink the cutoff until that is < tol/10.
    for _ in range(7):
        (energy, norm), change = adaptive_integrate(integrand, cutoff, math.pi - cutoff, tol)
        if norm == 0:
            raise ZeroDivisionError("zero-norm function")
        edge = np.array([cutoff, math.pi - cutoff])
        caps = (np.abs(integrand(edge)) / np.sin(edge) ** (n - 1)).sum(axis=1) * cutoff**n / n
        excluded = float(np.max(caps))
        if np.all(caps <= tol / 10 * np.maximum(np.abs([energy, norm]), np.abs(norm) * _EPS)):
            break
        cutoff /= 10
    else:
        raise QuadratureError(f"excluded polar caps ({excluded:.3g}) stay above tol/10")
    value = energy / norm
    slack = change + excluded
    rel = slack / abs(norm) + (slack / abs(energy) if energy else 0.0)
    return value, abs(value) * rel


def var_momentum_quadrature(f: ZonalFunction, tol: float = QUAD_TOL) -> float:
    """var_M = -int (Laplace-Beltrami f) f / int f^2, integrated in theta.

    The zonal Laplace-Beltrami operator is f'' + (n-1) cot(theta) f'.  The
    cot singularity is harmless because f'(theta) = O(sin theta); the
    integral is taken over [eps, pi - eps], eps = 1e-6 by default, shrunk
    tenfold until the estimated excluded caps are below tol/10 of each integral.
    """
    return _var_momentum_quadrature(f, tol)[0]


def uncertainty_product_quadrature(f: ZonalFunction, tol: float = QUAD_TOL) -> LocalizationReport:
    vs, vs_err = _var_space_quadrature(f, tol)
    vm, vm_err = _var_momentum_quadrature(f, tol)
    return _combine(f.n, vs, vs_err, vm, vm_err, Path.QUADRATURE)
