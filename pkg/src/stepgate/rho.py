"""Convex loss functions for M-regression and their first two derivatives.

The default family ("logistic") is a smoothed absolute value whose score
function is tanh(c*u/2): quadratic near zero, asymptotically linear, so
gross outliers get bounded influence. A Huber family is provided as the
conventional alternative. All three evaluators accept scalars or arrays.
"""

import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidInputError

__all__ = ["RhoFunction", "rho", "rho_d1", "rho_d2", "LINEAR_BRANCH"]

# |c*u| at and beyond which the logistic loss switches to its exact linear
# tail |u|. Fixed, not configurable. Note the switch is an approximation
# splice: the smooth branch tends to |u| - 2*log(2)/c, so rho itself steps up
# by 2*(log 2 - log(1+e^-15))/c ~= 1.3862937/c at the seam, while rho_d1 and
# rho_d2 are continuous there to ~1e-6. Fits never see the seam unless
# residuals exceed 15 robust scales.
LINEAR_BRANCH = 15.0

_FAMILIES = ("logistic", "huber")


@dataclass(frozen=True)
class RhoFunction:
    """A loss family plus its tuning constant c > 0."""

    family: str = "logistic"
    c: float = 1.0

    def __post_init__(self):
        if self.family not in _FAMILIES:
            raise InvalidInputError(
                f"unknown rho family {self.family!r}; expected one of {_FAMILIES}"
            )
        if not (isinstance(self.c, (int, float)) and math.isfinite(self.c) and self.c > 0):
            raise InvalidInputError(f"rho tuning constant must be finite and > 0, got {self.c!r}")


def _as_array(u):
    a = np.asarray(u, dtype=float)
    if not np.all(np.isfinite(a)):
        raise InvalidInputError("rho evaluation requires finite input")
    return a


def _ret(u, a):
    return float(a) if np.isscalar(u) or np.ndim(u) == 0 else a


def rho(fn, u):
    """Loss value, elementwise. rho(0) = 0 for both families."""
    a = _as_array(u)
    c = fn.c
    if fn.family == "huber":
        out = np.where(np.abs(a) <= c, 0.5 * a * a, c * (np.abs(a) - 0.5 * c))
        return _ret(u, out)
    cu = c * a
    # log(cosh(.)) form: symmetric and >= 0 by construction, where the
    # algebraically equal logaddexp(0,cu) - log 2 - u cancels to -u for
    # tiny u. cosh never overflows here: |cu|/2 < 7.5 inside the branch.
    half = np.where(np.abs(cu) < LINEAR_BRANCH, 0.5 * cu, 0.0)
    smooth = (2.0 / c) * np.log(np.cosh(half))
    out = np.where(np.abs(cu) >= LINEAR_BRANCH, np.abs(a), smooth)
    return _ret(u, out)


def rho_d1(fn, u):
    """First derivative (the score). Odd; bounded by 1 for the logistic family."""
    a = _as_array(u)
    c = fn.c
    if fn.family == "huber":
        return _ret(u, np.clip(a, -c, c))
    cu = c * a
    out = np.where(np.abs(cu) >= LINEAR_BRANCH, np.sign(a), np.tanh(0.5 * cu))
    return _ret(u, out)


def rho_d2(fn, u):
    """Second derivative. Nonnegative; maximal at 0 (c/2 for logistic, 1 for Huber)."""
    a = _as_array(u)
    c = fn.c
    if fn.family == "huber":
        return _ret(u, np.where(np.abs(a) <= c, 1.0, 0.0))
    cu = c * a
    inside = np.abs(cu) < LINEAR_BRANCH
    # sech^2 only evaluated inside the branch; cosh(7.5) is harmless
    half = np.where(inside, 0.5 * cu, 0.0)
    out = np.where(inside, (0.5 * c) / np.cosh(half) ** 2, 0.0)
    return _ret(u, out)
