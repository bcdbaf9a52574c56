"""M-regression tests.

The frozen fit below (built-in prostate data, intercept + lcavol, logistic
loss, sigma from the L1 start) was cross-checked against an independent
quasi-Newton minimizer of the same objective: coefficients agreed to 3e-6,
the objective to 3e-10. The scale seed itself was checked against an exact
LP solution of the L1 problem (agreement 1e-8).
"""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from numpy.testing import assert_allclose

import stepgate.mfit as mfit
from stepgate import (
    ConvergenceError,
    Dataset,
    DegenerateScaleError,
    DimensionError,
    InvalidInputError,
    MAD_FISHER_FACTOR,
    RhoFunction,
    ScaleState,
    fit_least_squares,
    l1_single_covariate_init,
    load_builtin,
    m_fit_fixed_scale,
    mad_scale,
)
from stepgate.mfit import irls_weights

LOGISTIC = RhoFunction("logistic", 1.0)


# ---------------------------------------------------------------- mad_scale

def test_mad_hand_values():
    assert mad_scale([1.0, 2.0, 3.0, 4.0, 5.0]) == pytest.approx(1.4826)
    assert mad_scale([1.0, 2.0, 3.0, 10.0]) == pytest.approx(1.4826)  # even-n midpoints
    assert mad_scale([2.0, 4.0]) == pytest.approx(1.4826)
    assert MAD_FISHER_FACTOR == 1.4826


def test_mad_degenerate_and_invalid():
    with pytest.raises(DegenerateScaleError):
        mad_scale([3.0, 3.0, 3.0])
    with pytest.raises(DegenerateScaleError):
        mad_scale([0.0, 0.0, 1.0])  # majority identical: MAD collapses
    with pytest.raises(InvalidInputError):
        mad_scale([1.0])
    with pytest.raises(InvalidInputError):
        mad_scale([1.0, np.nan, 2.0])


@settings(max_examples=100, deadline=None)
@given(
    shift=st.floats(min_value=-100, max_value=100),
    scale=st.floats(min_value=-10, max_value=10),
)
def test_mad_affine_equivariance(shift, scale):
    r = np.array([0.3, -1.2, 2.5, 0.9, -0.1, 4.0])
    if abs(scale) < 1e-6:
        return
    assert mad_scale(shift + scale * r) == pytest.approx(abs(scale) * mad_scale(r), rel=1e-10)


# ------------------------------------------------------------- irls_weights

def test_irls_weights():
    w = irls_weights(LOGISTIC, np.array([0.0, 2.0, 1e-11, -2.0]))
    assert w[0] == 0.5  # rho''(0) = c/2
    assert w[1] == pytest.approx(math.tanh(1.0) / 2.0)
    assert w[2] == 0.5  # below the tiny-residual cutoff
    assert w[3] == w[1]  # even in u
    assert irls_weights(LOGISTIC, np.array([1e20]))[0] == 1e-12  # floored
    h = RhoFunction("huber", 1.5)
    assert irls_weights(h, np.array([1.0]))[0] == 1.0
    assert irls_weights(h, np.array([3.0]))[0] == 0.5


# -------------------------------------------------------- m_fit_fixed_scale

def test_quadratic_loss_reproduces_least_squares():
    # huber with a huge corner never leaves its quadratic branch, so the
    # M-fit is the L2 fit and the L2 start is already stationary
    rng = np.random.default_rng(7)
    X = np.column_stack([np.ones(40), rng.standard_normal(40)])
    y = 1.0 + 2.0 * X[:, 1] + rng.standard_normal(40)
    fit = m_fit_fixed_scale(X, y, RhoFunction("huber", 1e6), sigma=1.0)
    ref = fit_least_squares(X, y)
    assert fit.iterations == 0
    assert_allclose(fit.coefficients, ref.coefficients, atol=1e-10)


def test_frozen_prostate_single_covariate_fit():
    ds, _ = load_builtin("prostate")
    X = np.column_stack([np.ones(ds.n), ds.columns["lcavol"]])
    fit = m_fit_fixed_scale(X, ds.y, LOGISTIC, sigma=0.37093423586131485)
    assert_allclose(fit.coefficients, [1.5722889, 0.6728559], atol=5e-5)
    assert fit.objective == pytest.approx(74.13676517, abs=1e-6)
    # stationarity contract: every score component below 1e-6 * n
    from stepgate import rho_d1

    grad = X.T @ rho_d1(LOGISTIC, fit.residuals / fit.sigma)
    assert np.max(np.abs(grad)) <= 1e-6 * ds.n
    assert fit.s1 > 0 and fit.s2 > 0
    assert fit.sigma == 0.37093423586131485


def test_summary_fields_are_consistent():
    rng = np.random.default_rng(3)
    X = rng.standard_normal((25, 2))
    y = rng.standard_normal(25)
    fit = m_fit_fixed_scale(X, y, LOGISTIC, sigma=2.0)
    from stepgate import rho, rho_d1, rho_d2

    u = fit.residuals / fit.sigma
    assert fit.objective == pytest.approx(float(np.sum(rho(LOGISTIC, u))), rel=1e-12)
    d1 = rho_d1(LOGISTIC, u)
    assert fit.s1 == pytest.approx(float(d1 @ d1), rel=1e-12)
    assert fit.s2 == pytest.approx(float(np.sum(rho_d2(LOGISTIC, u))), rel=1e-12)
    assert_allclose(fit.residuals, y - X @ fit.coefficients, atol=1e-12)


def test_empty_design_short_circuits():
    y = np.array([1.0, -2.0, 0.5])
    fit = m_fit_fixed_scale(np.empty((3, 0)), y, LOGISTIC, sigma=1.0)
    assert fit.coefficients.shape == (0,)
    assert fit.iterations == 0
    assert_allclose(fit.residuals, y)


def test_warm_start_at_solution_converges_immediately():
    rng = np.random.default_rng(11)
    X = np.column_stack([np.ones(30), rng.standard_normal(30)])
    y = rng.standard_normal(30) + X[:, 1]
    first = m_fit_fixed_scale(X, y, LOGISTIC, sigma=1.0)
    again = m_fit_fixed_scale(X, y, LOGISTIC, sigma=1.0, start=first.coefficients)
    assert again.iterations == 0
    assert_allclose(again.coefficients, first.coefficients)


def test_iteration_cap_raises_with_last_iterate(monkeypatch):
    rng = np.random.default_rng(5)
    X = np.column_stack([np.ones(20), rng.standard_normal(20)])
    y = rng.standard_normal(20) + 5.0  # L2 start is not stationary for rho
    monkeypatch.setattr(mfit, "MAX_ITER", 0)
    with pytest.raises(ConvergenceError) as exc:
        m_fit_fixed_scale(X, y, LOGISTIC, sigma=0.3)
    last = exc.value.last_iterate
    assert last is not None
    assert last.iterations == 0
    assert last.coefficients.shape == (2,)


def test_fit_input_validation():
    X = np.ones((5, 1))
    y = np.ones(5)
    with pytest.raises(InvalidInputError):
        m_fit_fixed_scale(X, y, LOGISTIC, sigma=0.0)
    with pytest.raises(InvalidInputError):
        m_fit_fixed_scale(X, y, LOGISTIC, sigma=math.nan)
    with pytest.raises(DimensionError):
        m_fit_fixed_scale(X, y, LOGISTIC, sigma=1.0, start=np.zeros(3))
    with pytest.raises(InvalidInputError):
        m_fit_fixed_scale(X, y, LOGISTIC, sigma=1.0, start=np.array([np.nan]))
    with pytest.raises(DimensionError):
        m_fit_fixed_scale(X, y[:4], LOGISTIC, sigma=1.0)


# ------------------------------------------------- l1_single_covariate_init

def test_l1_init_picks_the_dominant_column():
    rng = np.random.default_rng(42)
    n = 60
    x1 = rng.standard_normal(n)
    x2 = rng.standard_normal(n)
    y = 2.0 * x2 + 0.1 * rng.standard_normal(n)
    ds = Dataset("synthetic", y, {"x1": x1, "x2": x2})
    name, resid, state = l1_single_covariate_init(ds, intercept=True)
    assert name == "x2"
    assert resid.shape == (n,)
    assert isinstance(state, ScaleState)
    assert state.source == "l1-init"
    assert 0.05 < state.sigma < 0.5


def test_l1_init_frozen_prostate_value():
    ds, _ = load_builtin("prostate")
    name, _, state = l1_single_covariate_init(ds, intercept=True)
    assert name == "lcavol"
    assert state.sigma == pytest.approx(0.37093423586131485, abs=1e-9)


def test_l1_init_response_scale_equivariance():
    rng = np.random.default_rng(9)
    n = 40
    ds = Dataset(
        "s",
        rng.standard_normal(n) * 3.0,
        {"a": rng.standard_normal(n), "b": rng.standard_normal(n)},
    )
    name1, _, st1 = l1_single_covariate_init(ds, intercept=True)
    scaled = Dataset("s", ds.y * 5.0, ds.columns)
    name2, _, st2 = l1_single_covariate_init(scaled, intercept=True)
    assert name1 == name2
    assert st2.sigma == pytest.approx(5.0 * st1.sigma, rel=1e-6)


def test_l1_init_degenerate_constant_response():
    ds = Dataset("flat", np.full(4, 5.0), {"x1": np.array([1.0, 2.0, 3.0, 4.0])})
    with pytest.raises(DegenerateScaleError):
        l1_single_covariate_init(ds, intercept=True)


def test_l1_init_needs_data():
    tiny = Dataset("tiny", np.array([1.0, 2.0]), {"x": np.array([1.0, 2.0])})
    with pytest.raises(InvalidInputError):
        l1_single_covariate_init(tiny, intercept=True)
    empty = Dataset("none", np.array([1.0, 2.0, 3.0]), {})
    with pytest.raises(InvalidInputError):
        l1_single_covariate_init(empty, intercept=True)


def test_scale_state_validation():
    with pytest.raises(InvalidInputError):
        ScaleState(sigma=1.0, source="guess")
    with pytest.raises(InvalidInputError):
        ScaleState(sigma=-1.0, source="l1-init")
    with pytest.raises(InvalidInputError):
        ScaleState(sigma=math.inf, source="mad-update")
