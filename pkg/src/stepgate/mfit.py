"""M-regression at fixed scale, the MAD scale estimator, and the L1 start.

The fitter solves min_b sum rho((y_i - x_i'b)/sigma) by iteratively
reweighted least squares. sigma is never estimated jointly; the stepwise
driver owns the scale protocol (an L1 single-covariate fit seeds it, the
MAD of fresh residuals refreshes it after each inclusion).
"""

from dataclasses import dataclass

import numpy as np

from .errors import (
    ConvergenceError,
    DegenerateScaleError,
    DimensionError,
    InvalidInputError,
)
from .linalg import fit_least_squares, fit_weighted_least_squares
from .rho import rho, rho_d1, rho_d2

__all__ = [
    "MAD_FISHER_FACTOR",
    "MFitSummary",
    "ScaleState",
    "m_fit_fixed_scale",
    "mad_scale",
    "l1_single_covariate_init",
    "irls_weights",
]

# Fisher consistency factor at the normal distribution (R's mad() default).
MAD_FISHER_FACTOR = 1.4826

MAX_ITER = 200
GRAD_TOL = 1e-6  # per observation; the stopping rule is max|grad| <= GRAD_TOL * n
TINY_RESIDUAL = 1e-10
WEIGHT_FLOOR = 1e-12


@dataclass(frozen=True)
class MFitSummary:
    """An M-fit at fixed sigma.

    objective = sum rho(r_i/sigma); s1 = sum rho'(r_i/sigma)^2 and
    s2 = sum rho''(r_i/sigma) are the score/curvature sums the gate
    statistic needs, all evaluated at the returned coefficients.
    """

    coefficients: np.ndarray
    residuals: np.ndarray
    sigma: float
    objective: float
    s1: float
    s2: float
    iterations: int


@dataclass(frozen=True)
class ScaleState:
    """Current sigma and where it came from ("l1-init" or "mad-update")."""

    sigma: float
    source: str

    def __post_init__(self):
        if self.source not in ("l1-init", "mad-update"):
            raise InvalidInputError(f"unknown scale source {self.source!r}")
        if not (np.isfinite(self.sigma) and self.sigma > 0):
            raise InvalidInputError(f"sigma must be finite and > 0, got {self.sigma}")


def irls_weights(rho_fn, u):
    """IRLS weights rho'(u)/u, with the limit rho''(0) at u ~ 0, floored.

    The floor keeps rows with enormous residuals from zeroing out of the
    weighted system entirely.
    """
    u = np.asarray(u, dtype=float)
    small = np.abs(u) < TINY_RESIDUAL
    safe = np.where(small, 1.0, u)
    w = np.where(small, rho_d2(rho_fn, 0.0), rho_d1(rho_fn, safe) / safe)
    return np.maximum(w, WEIGHT_FLOOR)


def _summary(rho_fn, X, y, b, sigma, iterations):
    r = y - X @ b
    u = r / sigma
    d1 = rho_d1(rho_fn, u)
    return MFitSummary(
        coefficients=b,
        residuals=r,
        sigma=sigma,
        objective=float(np.sum(rho(rho_fn, u))),
        s1=float(d1 @ d1),
        s2=float(np.sum(rho_d2(rho_fn, u))),
        iterations=iterations,
    )


def m_fit_fixed_scale(design, response, rho_fn, sigma, start=None):
    """IRLS M-fit of response on design at the given sigma.

    Converged when every component of the score equation
    sum rho'(r_i/sigma) * x_ij is below 1e-6 * n in absolute value.
    Warm starts (e.g. the incumbent model's coefficients, zero-padded)
    usually finish in a handful of iterations; cold starts use the L2 fit.
    """
    X = np.asarray(design, dtype=float)
    y = np.asarray(response, dtype=float)
    if X.ndim != 2 or y.ndim != 1 or X.shape[0] != y.shape[0]:
        raise DimensionError("design must be (n, p) and response (n,)")
    if not (np.isfinite(sigma) and sigma > 0):
        raise InvalidInputError(f"sigma must be finite and > 0, got {sigma}")
    n, p = X.shape
    if p == 0:
        return _summary(rho_fn, X, y, np.zeros(0), sigma, 0)
    if start is not None:
        b = np.asarray(start, dtype=float)
        if b.shape != (p,):
            raise DimensionError(f"start must have shape ({p},), got {b.shape}")
        if not np.all(np.isfinite(b)):
            raise InvalidInputError("start contains non-finite values")
    else:
        b = fit_least_squares(X, y).coefficients
    tol = GRAD_TOL * n
    iterations = 0
    while True:
        u = (y - X @ b) / sigma
        grad = X.T @ rho_d1(rho_fn, u)
        if np.max(np.abs(grad)) <= tol:
            return _summary(rho_fn, X, y, b, sigma, iterations)
        if iterations >= MAX_ITER:
            raise ConvergenceError(
                f"IRLS did not meet the score tolerance in {MAX_ITER} iterations "
                f"(max |score| = {np.max(np.abs(grad)):.3e}, tol = {tol:.3e})",
                last_iterate=_summary(rho_fn, X, y, b, sigma, iterations),
            )
        w = irls_weights(rho_fn, u)
        b = fit_weighted_least_squares(X, y, w).coefficients
        iterations += 1


def mad_scale(residuals):
    """1.4826 * median(|r - median(r)|), the robust scale estimate.

    Even-length medians are the midpoint of the two central order
    statistics. A zero MAD (more than half the residuals identical) has no
    scale information and raises instead of returning 0.
    """
    r = np.asarray(residuals, dtype=float)
    if r.ndim != 1 or r.shape[0] < 2:
        raise InvalidInputError("mad_scale needs a 1-D vector of at least 2 residuals")
    if not np.all(np.isfinite(r)):
        raise InvalidInputError("residuals contain non-finite values")
    mad = float(np.median(np.abs(r - np.median(r))))
    if mad <= 0.0:
        raise DegenerateScaleError("median absolute deviation is zero")
    return MAD_FISHER_FACTOR * mad


def _lad_fit(X, y):
    # LAD via IRLS with weights 1/max(|r|, 1e-8); enough for the
    # single-covariate fits used here, no LP solver needed
    b = fit_least_squares(X, y).coefficients
    for _ in range(50):
        r = y - X @ b
        w = 1.0 / np.maximum(np.abs(r), 1e-8)
        b_new = fit_weighted_least_squares(X, y, w).coefficients
        if np.max(np.abs(b_new - b)) <= 1e-10 * (1.0 + np.max(np.abs(b_new))):
            b = b_new
            break
        b = b_new
    return b, y - X @ b


def l1_single_covariate_init(dataset, intercept):
    """Scale seed for the M-procedure.

    Fits an L1 regression of y on each single covariate (plus intercept if
    flagged), keeps the one with the smallest absolute-residual sum, and
    returns (column name, its residuals, ScaleState with sigma = MAD of
    those residuals). An exact fit leaves MAD = 0 and the resulting
    DegenerateScaleError propagates: callers must handle exact-fit starts.
    """
    y = np.asarray(dataset.y, dtype=float)
    n = y.shape[0]
    if n < 3:
        raise InvalidInputError("need at least 3 observations for the L1 start")
    if dataset.k < 1:
        raise InvalidInputError("need at least one covariate for the L1 start")
    ones = np.ones((n, 1))
    best_name = None
    best_obj = np.inf
    best_resid = None
    for name, col in dataset.columns.items():
        c = np.asarray(col, dtype=float).reshape(-1, 1)
        X = np.hstack([ones, c]) if intercept else c
        _, resid = _lad_fit(X, y)
        obj = float(np.sum(np.abs(resid)))
        if obj < best_obj:  # strict: ties keep the earlier column
            best_name, best_obj, best_resid = name, obj, resid
    state = ScaleState(sigma=mad_scale(best_resid), source="l1-init")
    return best_name, best_resid, state
