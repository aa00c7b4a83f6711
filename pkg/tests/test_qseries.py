import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from zonal_uncertainty.qseries import (
    BoundViolationError,
    PoleProximityError,
    QRational,
    SeriesIndex,
    SummationError,
    SummationResult,
    canonical_string,
    qrational_eval,
    s2_minus1_closed,
    s_closed_eval,
    s_closed_form,
    s_minus1_bound_check,
    s_numeric,
)

HALF_Q = math.log(2) / 2


def direct_sum(n, m, rho, terms=20000):
    """Plain loop over the defining series; independent of both library routes."""
    twice = n - 1
    total = []
    for l in range(1, terms):
        total.append(math.comb(l + twice - 1, l) * l**m * math.exp(-2 * rho * l))
    return math.fsum(total)


def test_numeric_geometric_cases():
    r = s_numeric(SeriesIndex(2, 0, HALF_Q))
    assert abs(r.value - 1.0) <= r.tail_bound + 1e-15
    r = s_numeric(SeriesIndex(2, 1, HALF_Q))
    assert abs(r.value - 2.0) <= r.tail_bound + 1e-14
    assert r.tail_bound <= 1e-12


def test_numeric_matches_closed_form_spot():
    r = s_numeric(SeriesIndex(3, 2, 0.5))
    closed = qrational_eval(s_closed_form(3, 2), math.exp(-1))
    assert r.value == pytest.approx(closed, rel=1e-12)


def test_numeric_matches_plain_loop():
    for n, m, rho in [(2, -1, 0.3), (4, 3, 0.2), (6, 0, 1.0)]:
        assert s_numeric(SeriesIndex(n, m, rho)).value == pytest.approx(direct_sum(n, m, rho), rel=1e-13)


def test_summation_result_invariant():
    with pytest.raises(ValueError):
        SummationResult(1.0, -1e-3, 3)
    assert SummationResult(1.0, 0.5, 3).interval == (0.5, 1.5)


def test_tail_bound_is_rigorous():
    # stop early with a loose tolerance and check the true remainder is covered
    for n, m, rho in [(2, 0, 0.1), (3, 4, 0.3), (5, -1, 0.2)]:
        loose = s_numeric(SeriesIndex(n, m, rho), tol=1e-2)
        exact = s_numeric(SeriesIndex(n, m, rho), tol=1e-14, relative=True).value
        assert exact - loose.value <= loose.tail_bound
        assert exact >= loose.value


def test_numeric_rejects_tiny_rho():
    with pytest.raises(SummationError):
        s_numeric(SeriesIndex(2, 0, 1e-9))


def test_series_index_validation():
    with pytest.raises(ValueError):
        SeriesIndex(2, -2, 0.1)
    with pytest.raises(ValueError):
        SeriesIndex(2, 0, 0.0)
    with pytest.raises(ValueError):
        SeriesIndex(1, 0, 0.1)


def test_closed_form_small_cases():
    assert canonical_string(s_closed_form(2, 0)) == "q / (1-q)^1"
    assert canonical_string(s_closed_form(2, 1)) == "q / (1-q)^2"
    assert canonical_string(s_closed_form(3, 0)) == "(2q - q^2) / (1-q)^2"
    # hand-applied q d/dq to q/(1-q)
    assert s_closed_form(2, 1) == QRational((0, 1), (1, -2, 1))


def test_closed_form_m4_against_numeric():
    closed = qrational_eval(s_closed_form(2, 4), 0.5)
    r = s_numeric(SeriesIndex(2, 4, HALF_Q))
    assert abs(closed - r.value) <= r.tail_bound + 1e-12 * closed
    # Eulerian numbers 1, 11, 11, 1
    assert s_closed_form(2, 4).num == tuple(Fraction(c) for c in (0, 1, 11, 11, 1))


@pytest.mark.parametrize("n", range(2, 7))
@pytest.mark.parametrize("m", range(0, 5))
def test_pole_order(n, m):
    assert s_closed_form(n, m).pole_order == n - 1 + m


@pytest.mark.parametrize("n", range(2, 7))
@pytest.mark.parametrize("m", range(0, 5))
@pytest.mark.parametrize("rho", [0.05, 0.1, 0.5, 1.0, 2.0])
def test_numeric_and_closed_agree(n, m, rho):
    r = s_numeric(SeriesIndex(n, m, rho))
    closed = s_closed_eval(n, m, rho)
    assert abs(r.value - closed) <= r.tail_bound + 1e-12 * abs(closed)


@pytest.mark.parametrize("n,m", [(2, 0), (3, 1), (4, 2), (6, 3)])
def test_recurrence_by_finite_differences(n, m):
    rho = 0.4

    def fd(h):
        return -0.5 * (s_closed_eval(n, m, rho + h) - s_closed_eval(n, m, rho - h)) / (2 * h)

    target = s_numeric(SeriesIndex(n, m + 1, rho), tol=1e-14, relative=True).value
    errs = [abs(fd(h) - target) for h in (1e-2, 5e-3, 2.5e-3)]
    orders = [math.log2(errs[i] / errs[i + 1]) for i in range(2)]
    assert min(orders) >= 1.9


@settings(max_examples=40, deadline=None)
@given(st.integers(2, 6), st.integers(0, 4), st.floats(0.01, 5.0))
def test_series_positive(n, m, rho):
    assert s_closed_eval(n, m, rho) > 0


def test_qrational_eval_examples():
    assert qrational_eval(s_closed_form(2, 0), 0.5) == 1.0
    assert qrational_eval(s_closed_form(2, 1), 0.5) == 2.0
    assert qrational_eval(s_closed_form(3, 0), 0.0) == 0.0


def test_qrational_eval_accurate_near_one():
    rho = 1e-3
    omq = -math.expm1(-2 * rho)
    # S_{2,1} = q/(1-q)^2
    want = math.exp(-2 * rho) / omq**2
    assert s_closed_eval(2, 1, rho) == pytest.approx(want, rel=1e-14)


def test_qrational_pole_proximity():
    near_pole = QRational((1,), (1, -3))  # 1/(1-3q), pole at q = 1/3
    with pytest.raises(PoleProximityError):
        qrational_eval(near_pole, 1 / 3)
    with pytest.raises(ValueError):
        qrational_eval(near_pole, 1.5)


def test_qrational_arithmetic_and_reduction():
    r = QRational((0, 1), (1, -1))
    s = r + 1
    assert s == QRational((1,), (1, -1))
    assert (s - 1) == r
    assert (r * 2) / 2 == r
    assert QRational((1, -1), (1, -2, 1)) == QRational((1,), (1, -1))
    with pytest.raises(ZeroDivisionError):
        QRational((1,), (0,))


def test_closed_form_rejects_negative_m():
    with pytest.raises(ValueError):
        s_closed_form(2, -1)


def test_s2_minus1_closed():
    assert s2_minus1_closed(HALF_Q) == pytest.approx(math.log(2), rel=1e-15)
    # frozen from direct summation at 50 digits
    assert s2_minus1_closed(1.0) == pytest.approx(0.14541345786885906, rel=1e-14)
    assert s2_minus1_closed(20.0) == pytest.approx(math.exp(-40), rel=1e-15)
    assert s2_minus1_closed(1.0) == pytest.approx(direct_sum(2, -1, 1.0, 200), rel=1e-14)


def test_minus1_bound_examples():
    rep = s_minus1_bound_check(2, 0.5)
    assert rep.holds
    assert rep.s2_minus1 == pytest.approx(0.458675, abs=1e-6)
    assert rep.upper == pytest.approx(0.367879 + 0.219384, abs=2e-6)
    rep = s_minus1_bound_check(2, 5.0)
    assert rep.holds and rep.s2_minus1 <= rep.upper
    rep = s_minus1_bound_check(4, 0.1)
    assert rep.holds
    scaled = [v for _, v in rep.scaled_ladder]
    assert max(scaled) < rep.ladder_constant


@pytest.mark.parametrize("rho", [1e-3, 0.01, 0.1, 0.5, 1.0, 3.0])
def test_s2_minus1_bound_holds(rho):
    assert s_minus1_bound_check(2, rho).holds


def test_minus1_ladder_detects_faster_growth(monkeypatch):
    # a ladder that blows up like 1/rho must be reported
    import zonal_uncertainty.qseries as qs

    real = qs.s_numeric

    def inflated(idx, tol=1e-12, *, relative=False):
        r = real(idx, tol, relative=relative)
        return SummationResult(r.value / idx.rho, r.tail_bound, r.terms_used)

    monkeypatch.setattr(qs, "s_numeric", inflated)
    with pytest.raises(BoundViolationError):
        qs.s_minus1_bound_check(4, 0.1)
