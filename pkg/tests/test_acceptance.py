"""Acceptance criteria, each checked at its stated tolerance.

Every test records its verdict through the ``criterion`` fixture before
asserting, so the terminal summary shows one PASS/FAIL line per criterion even
when a criterion fails.
"""

import math

import numpy as np

from zonal_uncertainty.abel_poisson import (
    AbelPoissonWavelet,
    ap_alpha_extract,
    ap_coefficients,
    ap_limit_uncertainty,
    ap_rest_term,
    ap_uncertainty,
    ap_var_momentum_closed,
    ap_var_space,
    var_space_rest_form,
)
from zonal_uncertainty.localization import (
    ZonalFunction,
    uncertainty_product,
    uncertainty_product_quadrature,
    var_momentum_coeff,
)
from zonal_uncertainty.qseries import SeriesIndex, s_closed_eval, s_minus1_bound_check, s_numeric
from zonal_uncertainty.special_fn import sqrt_sandwich_violations

DIMS = (2, 3, 4, 5, 6)
LADDER = (0.2, 0.1, 0.05, 0.025, 0.0125)
GRID = np.geomspace(0.01, 3, 30)


def limit_formula(n):
    return 0.5 * math.sqrt((n + 1) * (n + 2) * (n * n - 3 * n + 3) / (n * (n - 1)))


def test_ac1_closed_form_momentum(criterion):
    worst = 0.0
    for n in DIMS:
        for rho in GRID:
            w = AbelPoissonWavelet(n, float(rho))
            series = var_momentum_coeff(ap_coefficients(w), w.lam)
            worst = max(worst, abs(ap_var_momentum_closed(w) - series) / series)
    assert criterion("AC1 closed-form var_M vs series", worst <= 1e-10, f"max rel err {worst:.2e} (tol 1e-10)")


def test_ac2_limit_reproduction(criterion):
    rel = {}
    non_monotone = {}
    for n in DIMS:
        lim = limit_formula(n)
        rel[n] = abs(ap_uncertainty(AbelPoissonWavelet(n, 1e-3)) - lim) / lim
        gaps = [abs(ap_uncertainty(AbelPoissonWavelet(n, r)) - lim) for r in LADDER]
        if not all(b < a for a, b in zip(gaps, gaps[1:])):
            non_monotone[n] = [round(g, 5) for g in gaps]
    worst = max(rel.values())
    ok = worst <= 0.01 and not non_monotone
    detail = f"max rel gap at rho=1e-3 {worst:.2e} (tol 1e-2); non-monotone ladders {non_monotone or 'none'}"
    assert criterion("AC2 limit reproduction", ok, detail)


def test_ac3_asymptotic_leading_terms(criterion):
    rho = 1e-3
    bad = []
    gains = []
    err_s, err_m = {}, {}
    for n in DIMS:
        w = AbelPoissonWavelet(n, rho)
        lead_s = (n * n - 3 * n + 3) / (n * (n - 1))
        lead_m = (n + 1) * (n + 2) / 4
        err_s[n] = abs(ap_var_space(w) / rho**2 - lead_s) / lead_s
        err_m[n] = abs(ap_var_momentum_closed(w) * rho**2 - lead_m) / lead_m
        coarse = 0.05
        vm = ap_var_momentum_closed(AbelPoissonWavelet(n, coarse)) * coarse**2
        gain = abs(vm - lead_m) / abs(vm - lead_m - (n * n - 1) * coarse / (2 * n))
        gains.append(gain)
        if err_s[n] > 0.01:
            bad.append(f"var_S n={n} ({err_s[n]:.3%})")
        if err_m[n] > 0.01:
            bad.append(f"var_M n={n} ({err_m[n]:.3%})")
        if gain < 10:
            bad.append(f"gain n={n} ({gain:.1f}x)")
    detail = (f"max var_S err {max(err_s.values()):.3%}, max var_M err {max(err_m.values()):.3%}, "
              f"min correction gain {min(gains):.0f}x; misses {bad or 'none'}")
    assert criterion("AC3 asymptotic leading terms", not bad, detail)


def test_ac4_uncertainty_principle(criterion):
    worst = math.inf
    violations = []
    for n in DIMS:
        for rho in np.geomspace(1e-3, 3, 30):
            seq_w = AbelPoissonWavelet(n, float(rho))
            rep = uncertainty_product(ap_coefficients(seq_w), seq_w.lam)
            margin = rep.lower_bound_margin
            worst = min(worst, margin)
            if margin < -rep.error_estimate:
                violations.append((n, float(rho)))
    ok = not violations
    assert criterion("AC4 uncertainty principle U >= n/2", ok, f"min margin {worst:.4g}; violations {len(violations)}")


def test_ac5_series_vs_closed_forms(criterion):
    worst = 0.0
    failures = 0
    for n in DIMS:
        for m in range(5):
            for rho in (0.05, 0.1, 0.5, 1.0, 2.0):
                r = s_numeric(SeriesIndex(n, m, rho))
                closed = s_closed_eval(n, m, rho)
                slack = r.tail_bound + 1e-12 * abs(closed)
                worst = max(worst, abs(r.value - closed) / slack)
                failures += abs(r.value - closed) > slack
    assert criterion("AC5 S_{n,m} series vs closed form", failures == 0,
                     f"125 cases, worst gap/allowance {worst:.3f}, failures {failures}")


def test_ac6_quadrature_cross_check(criterion):
    worst = 0.0
    for n in (2, 3):
        for rho in (0.2, 0.5, 1.0):
            w = AbelPoissonWavelet(n, rho)
            seq = ap_coefficients(w)
            coeff = uncertainty_product(seq, w.lam)
            quad = uncertainty_product_quadrature(ZonalFunction.from_sequence(seq, w.lam))
            worst = max(worst,
                        abs(quad.var_space - coeff.var_space) / coeff.var_space,
                        abs(quad.var_momentum - coeff.var_momentum) / coeff.var_momentum)
    assert criterion("AC6 quadrature cross-check", worst <= 1e-6, f"max rel err {worst:.2e} (tol 1e-6)")


def test_ac7_proof_bounds(criterion):
    rhos = [float(r) for r in np.geomspace(1e-3, 1, 12)] + [2.0, 5.0]
    rest_ratio = 0.0
    rest_bad = []
    for n in DIMS:
        for rho in rhos:
            rest = ap_rest_term(n, rho, strict=False)
            rest_ratio = max(rest_ratio, abs(rest.r) / rest.bound)
            if abs(rest.r) > rest.bound + rest.numerical_error:
                rest_bad.append((n, rho))
    s2_bad = [rho for rho in rhos if not s_minus1_bound_check(2, rho, strict=False).holds]
    sandwich_bad = sqrt_sandwich_violations(1_000_000)
    alpha_max = 0.0
    recon = 0.0
    for n in DIMS:
        for rho in np.geomspace(1e-3, 1, 30):
            rho = float(rho)
            a = ap_alpha_extract(n, rho)
            alpha_max = max(alpha_max, abs(a))
            vs = ap_var_space(AbelPoissonWavelet(n, rho))
            recon = max(recon, abs(var_space_rest_form(n, rho, a) - vs) / vs)
    ok = not rest_bad and not s2_bad and not sandwich_bad and math.isfinite(alpha_max) and recon <= 1e-8
    detail = (f"max |R|/bound {rest_ratio:.3f}, S2 bound violations {len(s2_bad)}, "
              f"sandwich violations {len(sandwich_bad)}, max |alpha| {alpha_max:.3g}, "
              f"reconstruction rel err {recon:.1e} (tol 1e-8)")
    assert criterion("AC7 proof bounds", ok, detail)


def test_ac8_spot_values(criterion):
    vm = ap_var_momentum_closed(AbelPoissonWavelet(2, math.log(2) / 2))
    e_vm = abs(vm - 192 / 7) / (192 / 7)
    e2 = abs(ap_limit_uncertainty(2) - math.sqrt(6) / 2)
    e3 = abs(ap_limit_uncertainty(3) - math.sqrt(10) / 2)
    ok = e_vm <= 1e-12 and e2 <= 1e-15 and e3 <= 1e-15
    assert criterion("AC8 spot values", ok, f"192/7 rel err {e_vm:.1e}; limit abs errs {e2:.1e}, {e3:.1e}")
