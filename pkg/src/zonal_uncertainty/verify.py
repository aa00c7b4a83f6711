"""Check suites behind ``zonal-uncertainty verify``.

Each suite returns :class:`Check` records; a run passes iff every check does.
``fault`` multiplies the closed-form var_M by (1 + fault) so tests can confirm
the suites actually detect a wrong formula.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import Callable

import numpy as np

from . import abel_poisson as ap
from .localization import (
    QUAD_TOL,
    CoefficientSequence,
    ZonalFunction,
    uncertainty_product,
    uncertainty_product_quadrature,
    var_momentum_coeff,
    var_momentum_quadrature,
)
from .qseries import SeriesIndex, s_closed_eval, s_minus1_bound_check, s_numeric
from .special_fn import gamma0, sqrt_sandwich_violations

DIMENSIONS = (2, 3, 4, 5, 6)
LIMIT_LADDER = (0.2, 0.1, 0.05, 0.025, 0.0125)


@dataclass
class Check:
    suite: str
    name: str
    passed: bool
    detail: str = ""
    metrics: dict = field(default_factory=dict)

    def __post_init__(self):
        # suites often compute verdicts with numpy, whose scalars json rejects
        self.passed = bool(self.passed)
        self.metrics = {k: _plain(v) for k, v in self.metrics.items()}


def _plain(value):
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    if isinstance(value, np.generic):
        return value.item()
    return value


class Verifier:
    def __init__(self, tol: float = 1e-12, quad_tol: float = QUAD_TOL, fault: float = 0.0):
        self.tol = tol
        self.quad_tol = quad_tol
        self.fault = fault

    def var_momentum(self, w: ap.AbelPoissonWavelet) -> float:
        return ap.ap_var_momentum_closed(w) * (1 + self.fault)

    def uncertainty(self, w: ap.AbelPoissonWavelet) -> float:
        return math.sqrt(ap.ap_var_space(w, self.tol) * self.var_momentum(w))

    # --- suites ---------------------------------------------------------------

    def closed_vs_numeric(self) -> list[Check]:
        worst = 0.0
        failures = []
        for n in DIMENSIONS:
            for m in range(5):
                for rho in (0.05, 0.1, 0.5, 1.0, 2.0):
                    num = s_numeric(SeriesIndex(n, m, rho), self.tol)
                    closed = s_closed_eval(n, m, rho)
                    slack = num.tail_bound + 1e-12 * abs(closed)
                    gap = abs(num.value - closed)
                    worst = max(worst, gap / slack)
                    if gap > slack:
                        failures.append((n, m, rho))
        return [Check("qseries", "S_{n,m} numeric vs closed form", not failures,
                      f"worst gap/allowance {worst:.3g}; failures {failures[:5]}", {"worst_ratio": worst})]

    def var_momentum_identity(self, rhos) -> list[Check]:
        worst = 0.0
        for n in DIMENSIONS:
            for rho in rhos:
                w = ap.AbelPoissonWavelet(n, rho)
                closed = self.var_momentum(w)
                series = var_momentum_coeff(ap.ap_coefficients(w), w.lam, self.tol)
                ratio_form = ap.ap_var_momentum_series(w)
                worst = max(worst, abs(closed - series) / series, abs(closed - ratio_form) / ratio_form)
        return [Check("abel_poisson", f"closed var_M vs coefficient series ({len(rhos)} rho/dim)",
                      worst <= 1e-10, f"max rel err {worst:.3g}", {"max_rel_err": worst})]

    def cross_path(self) -> list[Check]:
        checks = []
        for n in (2, 3):
            for rho in (0.2, 0.5, 1.0):
                w = ap.AbelPoissonWavelet(n, rho)
                seq = ap.ap_coefficients(w)
                coeff = uncertainty_product(seq, w.lam, self.tol)
                quad = uncertainty_product_quadrature(ZonalFunction.from_sequence(seq, w.lam, self.quad_tol), self.quad_tol)
                vm_coeff = coeff.var_momentum * (1 + self.fault)
                es = abs(coeff.var_space - quad.var_space) / coeff.var_space
                em = abs(vm_coeff - quad.var_momentum) / vm_coeff
                checks.append(Check("localization", f"coefficient vs quadrature n={n} rho={rho}",
                                    max(es, em) <= 1e-6, f"var_S {es:.2e}, var_M {em:.2e}",
                                    {"var_space_rel": es, "var_momentum_rel": em}))
        return checks

    def proof_bounds(self, rhos) -> list[Check]:
        checks = []
        worst = 0.0
        bad = []
        for n in DIMENSIONS:
            for rho in rhos:
                rest = ap.ap_rest_term(n, rho, self.tol, strict=False)
                worst = max(worst, abs(rest.r) / rest.bound)
                if abs(rest.r) > rest.bound + rest.numerical_error:
                    bad.append((n, rho))
        checks.append(Check("abel_poisson", "|R| <= S_{n,-1}/4", not bad,
                            f"max |R|/bound {worst:.3f}; violations {bad[:5]}", {"max_ratio": worst}))
        bad = [rho for rho in rhos if not s_minus1_bound_check(2, rho, strict=False).holds]
        checks.append(Check("qseries", "0 <= S_{2,-1} <= e^{-2rho} + Gamma(0,2rho)", not bad, f"violations {bad}"))
        return checks

    def spot_values(self) -> list[Check]:
        vm = self.var_momentum(ap.AbelPoissonWavelet(2, math.log(2) / 2))
        e_vm = abs(vm - 192 / 7) / (192 / 7)
        e2 = abs(ap.ap_limit_uncertainty(2) - math.sqrt(6) / 2)
        e3 = abs(ap.ap_limit_uncertainty(3) - math.sqrt(10) / 2)
        return [
            Check("spot", "var_M(n=2, e^{2rho}=2) = 192/7", e_vm <= 1e-12, f"rel err {e_vm:.2e}"),
            Check("spot", "limit U(n=2) = sqrt(6)/2, U(n=3) = sqrt(10)/2", max(e2, e3) <= 1e-15,
                  f"abs err {e2:.1e}, {e3:.1e}"),
        ]

    def limit_ladder(self) -> list[Check]:
        checks = []
        for n in DIMENSIONS:
            lim = ap.ap_limit_uncertainty(n)
            u = self.uncertainty(ap.AbelPoissonWavelet(n, 1e-3))
            rel = abs(u - lim) / lim
            gaps = [abs(self.uncertainty(ap.AbelPoissonWavelet(n, r)) - lim) for r in LIMIT_LADDER]
            monotone = all(b < a for a, b in zip(gaps, gaps[1:]))
            checks.append(Check("abel_poisson", f"U(1e-3) within 1% of limit, n={n}", rel <= 0.01,
                                f"rel gap {rel:.2e}", {"rel_gap": rel}))
            checks.append(Check("abel_poisson", f"|U - limit| monotone on rho ladder, n={n}", monotone,
                                "gaps " + ", ".join(f"{g:.3g}" for g in gaps), {"gaps": gaps}))
        return checks

    def asymptotics(self) -> list[Check]:
        checks = []
        rho = 1e-3
        for n in DIMENSIONS:
            w = ap.AbelPoissonWavelet(n, rho)
            lead_s = (n * n - 3 * n + 3) / (n * (n - 1))
            lead_m = (n + 1) * (n + 2) / 4
            es = abs(ap.ap_var_space(w, self.tol) / rho**2 - lead_s) / lead_s
            em = abs(self.var_momentum(w) * rho**2 - lead_m) / lead_m
            coarse = ap.AbelPoissonWavelet(n, 0.05)
            vm = self.var_momentum(coarse)
            one_term = abs(vm - lead_m / 0.05**2)
            two_term = abs(vm - ap.ap_asymptotics(n, 0.05)[1])
            gain = one_term / two_term
            checks.append(Check("abel_poisson", f"var_S/rho^2 leading coefficient, n={n}", es <= 0.01, f"rel err {es:.3e}"))
            checks.append(Check("abel_poisson", f"var_M rho^2 leading coefficient, n={n}", em <= 0.01, f"rel err {em:.3e}"))
            checks.append(Check("abel_poisson", f"1/rho correction gains >= 10x at rho=0.05, n={n}", gain >= 10, f"gain {gain:.1f}"))
        return checks

    def uncertainty_principle(self) -> list[Check]:
        rhos = np.geomspace(1e-3, 3, 25)
        worst = math.inf
        bad = []
        for n in DIMENSIONS:
            for rho in rhos:
                w = ap.AbelPoissonWavelet(n, float(rho))
                margin = self.uncertainty(w) - n / 2
                worst = min(worst, margin)
                if margin < -1e-9:
                    bad.append((n, float(rho)))
            lim_margin = ap.ap_limit_uncertainty(n) - n / 2
            worst = min(worst, lim_margin)
        bad += [n for n in range(2, 51) if not ap.ap_limit_uncertainty(n) > n / 2]
        return [Check("abel_poisson", "U >= n/2 on grid and in the limit", not bad,
                      f"min margin {worst:.4g}; violations {bad[:5]}", {"min_margin": worst})]

    def alpha_structure(self) -> list[Check]:
        rhos = np.geomspace(1e-3, 1, 30)
        checks = []
        for n in DIMENSIONS:
            alphas = []
            worst = 0.0
            for rho in rhos:
                a = ap.ap_alpha_extract(n, float(rho), self.tol)
                alphas.append(a)
                vs = ap.ap_var_space(ap.AbelPoissonWavelet(n, float(rho)), self.tol)
                worst = max(worst, abs(ap.var_space_rest_form(n, float(rho), a) - vs) / vs)
            amax = max(abs(a) for a in alphas)
            checks.append(Check("abel_poisson", f"alpha finite on [1e-3, 1] and reconstructs var_S, n={n}",
                                math.isfinite(amax) and worst <= 1e-8,
                                f"max|alpha| {amax:.4g}, reconstruction rel err {worst:.2e}",
                                {"max_abs_alpha": amax, "reconstruction_rel_err": worst}))
        return checks

    def minus1_growth(self) -> list[Check]:
        bad = [n for n in (3, 4, 5, 6) if not s_minus1_bound_check(n, 0.1, strict=False).holds]
        return [Check("qseries", "S_{n,-1} rho^(n-2) bounded along halving ladder", not bad, f"violations {bad}")]

    def sandwich(self) -> list[Check]:
        bad = sqrt_sandwich_violations(1_000_000)
        return [Check("special_fn", "sqrt(l(l+1)) sandwich for l <= 1e6 (exact integers)", not bad, f"violations {bad[:5]}")]

    def quadrature_oracles(self) -> list[Check]:
        checks = []
        for n in (2, 3, 4):
            lam = (n - 1) / 2
            mode = ZonalFunction(CoefficientSequence.single_mode(1), 1, lam)
            e_mode = abs(var_momentum_quadrature(mode, self.quad_tol) - n) / n
            # f = 1 + cos(theta), since C_1^lam(t) = 2 lam t
            seq = CoefficientSequence.from_values([1, 1 / (2 * lam)])
            quad = uncertainty_product_quadrature(ZonalFunction(seq, 1, lam), self.quad_tol)
            coeff = uncertainty_product(seq, lam)
            e_cross = max(abs(quad.var_space - coeff.var_space) / coeff.var_space,
                          abs(quad.var_momentum - coeff.var_momentum) / coeff.var_momentum)
            checks.append(Check("localization", f"quadrature: C_1 eigenvalue and 1+cos(theta), n={n}",
                                max(e_mode, e_cross) <= 1e-8, f"eigen {e_mode:.1e}, cross {e_cross:.1e}"))
        return checks

    def gamma0_checks(self) -> list[Check]:
        x = np.geomspace(1e-6, 50, 400)
        vals = np.array([gamma0(v) for v in x])
        ok = bool(np.all(vals > 0) and np.all(np.diff(vals) < 0))
        return [Check("special_fn", "Gamma(0,x) positive and decreasing on [1e-6, 50]", ok)]

    def run(self, level: str = "fast") -> list[Check]:
        suites: list[Callable[[], list[Check]]] = [
            self.spot_values,
            self.closed_vs_numeric,
            lambda: self.var_momentum_identity((0.05, 0.2, 0.5, 1.0, 2.0)),
            self.cross_path,
            lambda: self.proof_bounds((0.05, 0.1, 0.5, 1.0)),
        ]
        if level == "full":
            suites += [
                lambda: self.var_momentum_identity(tuple(np.geomspace(0.01, 3, 30))),
                self.limit_ladder,
                self.asymptotics,
                self.uncertainty_principle,
                lambda: self.proof_bounds(tuple(np.geomspace(1e-3, 1, 12))),
                self.alpha_structure,
                self.minus1_growth,
                self.sandwich,
                self.quadrature_oracles,
                self.gamma0_checks,
            ]
        elif level != "fast":
            raise ValueError(f"unknown level {level!r}")
        checks = []
        for suite in suites:
            checks.extend(suite())
        return checks


def as_dicts(checks: list[Check]) -> list[dict]:
    return [asdict(c) for c in checks]
