"""Distribution-function tests.

Oracles are deliberately independent of the implementation: the chi^2_1 CDF
via the error function (pchisq(x,1) = erf(sqrt(x/2))), the chi^2_2 CDF in
closed form (1 - exp(-x/2)), and quantiles by bisection against those CDFs.
"""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from stepgate import (
    DomainError,
    InvalidInputError,
    gate_threshold,
    max_chisq_tail,
    pchisq,
    qchisq,
)


def chisq1_cdf(x):
    return math.erf(math.sqrt(x / 2.0)) if x > 0 else 0.0


def chisq2_cdf(x):
    return -math.expm1(-x / 2.0) if x > 0 else 0.0


def bisect_quantile(p, cdf, hi=400.0):
    lo = 0.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if cdf(mid) < p:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


@pytest.mark.parametrize("x", [0.01, 0.1, 0.5, 1.0, 2.0, 3.84, 5.0, 10.0, 25.0, 60.0])
def test_pchisq_df1_matches_erf(x):
    assert pchisq(x, 1) == pytest.approx(chisq1_cdf(x), abs=1e-13)


@pytest.mark.parametrize("x", [0.05, 0.7, 1.0, 4.0, 9.2, 30.0])
def test_pchisq_df2_closed_form(x):
    assert pchisq(x, 2) == pytest.approx(chisq2_cdf(x), abs=1e-13)


def test_pchisq_reference_point():
    # P(chi^2_1 <= 1) = erf(1/sqrt(2)): the one-sigma two-sided normal mass
    assert pchisq(1.0, 1) == pytest.approx(0.6826894921370859, abs=1e-12)


def test_pchisq_edges():
    assert pchisq(0.0, 1) == 0.0
    assert pchisq(-3.0, 5) == 0.0
    assert pchisq(math.inf, 3) == 1.0
    with pytest.raises(InvalidInputError):
        pchisq(math.nan, 1)


@pytest.mark.parametrize("df", [0, -1, 1.5, True, "1"])
def test_pchisq_rejects_bad_df(df):
    with pytest.raises(InvalidInputError):
        pchisq(1.0, df)


def test_pchisq_monotone_in_x():
    xs = np.linspace(0.0, 40.0, 200)
    vals = [pchisq(float(x), 3) for x in xs]
    assert all(b >= a for a, b in zip(vals, vals[1:]))


@pytest.mark.parametrize("p", [0.001, 0.05, 0.25, 0.5, 0.9, 0.95, 0.99, 0.9999])
def test_qchisq_df1_vs_bisection(p):
    assert qchisq(p, 1) == pytest.approx(bisect_quantile(p, chisq1_cdf), abs=1e-9)


@pytest.mark.parametrize("p", [0.01, 0.3, 0.5, 0.95, 0.999])
def test_qchisq_df2_closed_form(p):
    assert qchisq(p, 2) == pytest.approx(-2.0 * math.log1p(-p), rel=1e-12)


def test_qchisq_reference_point():
    assert qchisq(0.95, 1) == pytest.approx(3.841458820694124, abs=1e-9)


def test_qchisq_edges():
    assert qchisq(0.0, 1) == 0.0
    for bad in (-0.1, 1.0, 1.5, math.nan):
        with pytest.raises(DomainError):
            qchisq(bad, 1)


@settings(max_examples=200, deadline=None)
@given(
    p=st.floats(min_value=1e-10, max_value=1.0 - 1e-10),
    df=st.integers(min_value=1, max_value=50),
)
def test_quantile_cdf_roundtrip(p, df):
    assert abs(pchisq(qchisq(p, df), df) - p) <= 1e-9


@pytest.mark.parametrize("x,k0", [(0.5, 1), (1.0, 3), (3.84, 8), (7.0, 20), (0.2, 50)])
def test_max_tail_matches_power_form(x, k0):
    # the naive 1 - F^k form is exact where F is far from 1
    naive = 1.0 - chisq1_cdf(x) ** k0
    assert max_chisq_tail(x, k0) == pytest.approx(naive, abs=1e-12)


def test_max_tail_reference_point():
    # best of 8 noise columns against the single-column 5% critical value;
    # frozen from the erf form 1 - erf(sqrt(x/2))^8
    assert max_chisq_tail(3.841458820694124, 8) == pytest.approx(0.3365795687109378, abs=1e-12)


def test_max_tail_deep_tail_keeps_precision():
    # F(200)^50 rounds to 1.0 in double precision; the stable form does not
    p = max_chisq_tail(200.0, 50)
    q = 1.0 - chisq1_cdf(200.0)  # upper tail of one chi^2_1
    assert 0.0 < p < 1e-40
    assert p == pytest.approx(50 * q, rel=1e-6)  # 1-(1-q)^50 ~ 50q for tiny q


def test_max_tail_edges():
    assert max_chisq_tail(0.0, 5) == 1.0
    assert max_chisq_tail(-1.0, 5) == 1.0
    assert max_chisq_tail(math.inf, 5) == 0.0
    with pytest.raises(InvalidInputError):
        max_chisq_tail(math.nan, 5)
    for bad in (0, -2, 1.5, True):
        with pytest.raises(InvalidInputError):
            max_chisq_tail(1.0, bad)


def test_max_tail_monotone():
    # decreasing in x, increasing in k0
    xs = np.linspace(0.1, 20.0, 50)
    vals = [max_chisq_tail(float(x), 7) for x in xs]
    assert all(b <= a for a, b in zip(vals, vals[1:]))
    ks = [max_chisq_tail(2.5, k) for k in range(1, 30)]
    assert all(b >= a for a, b in zip(ks, ks[1:]))


def test_gate_threshold_k1_is_plain_quantile():
    for alpha in (0.01, 0.05, 0.2):
        assert gate_threshold(alpha, 1) == pytest.approx(qchisq(1.0 - alpha, 1), rel=1e-12)


@settings(max_examples=200, deadline=None)
@given(
    alpha=st.floats(min_value=1e-6, max_value=1.0 - 1e-6),
    k0=st.integers(min_value=1, max_value=50),
)
def test_gate_threshold_duality(alpha, k0):
    # the threshold is exactly the statistic whose tail probability is alpha
    assert abs(max_chisq_tail(gate_threshold(alpha, k0), k0) - alpha) <= 1e-8


def test_gate_threshold_reference_point():
    assert gate_threshold(0.05, 8) == pytest.approx(7.436572068773083, abs=1e-9)


def test_gate_threshold_monotone():
    ks = [gate_threshold(0.05, k) for k in range(1, 40)]
    assert all(b > a for a, b in zip(ks, ks[1:]))  # more noise columns, higher bar
    alphas = [gate_threshold(a, 10) for a in (0.01, 0.05, 0.1, 0.5)]
    assert all(b < a for a, b in zip(alphas, alphas[1:]))


def test_gate_threshold_rejects_bad_input():
    for bad in (0.0, 1.0, -0.5, math.nan):
        with pytest.raises(DomainError):
            gate_threshold(bad, 3)
    with pytest.raises(InvalidInputError):
        gate_threshold(0.05, 0)
