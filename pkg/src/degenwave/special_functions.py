"""Real branches of the Lambert W function.

``W`` is the inverse of ``y -> y * exp(y)``.  On the real line it has two
branches meeting at the branch point ``(-1/e, -1)``:

* ``W0``  (principal) on ``[-1/e, inf)`` with values in ``[-1, inf)``;
* ``W-1`` (lower) on ``[-1/e, 0)`` with values in ``(-inf, -1]``.

Initial guesses come from the branch-point series, a ``log1p`` based
approximation or the large-argument asymptotic expansion; they are refined
by Halley's method.  Large arguments are handled in logarithmic form, which
also gives :func:`lambert_w0_exp` for arguments that would overflow.
"""
from __future__ import annotations

import enum
import math
import sys

import numpy as np

from .errors import DomainError

__all__ = ["WBranch", "lambert_w", "lambert_w0_exp", "BRANCH_POINT"]

_EPS = sys.float_info.epsilon
_MAX_ITER = 50

# 1/e split into a double and its rounding error
_INV_E_HI = 0.36787944117144233
_INV_E_LO = -1.2428753672788363e-17
BRANCH_POINT = -_INV_E_HI

_SERIES_RADIUS = 1e-6
_NEAR_BP = 0.1

# Branch-point series W = sum a_k p^k with p = +-sqrt(2 (e x + 1))
_BP_COEFFS = (
    -1.0,
    1.0,
    -1.0 / 3.0,
    11.0 / 72.0,
    -43.0 / 540.0,
    769.0 / 17280.0,
    -221.0 / 8505.0,
    680863.0 / 43545600.0,
    -1963.0 / 204120.0,
)


class WBranch(enum.Enum):
    PRINCIPAL = 0
    LOWER = -1

    @classmethod
    def parse(cls, value) -> "WBranch":
        """Accept a member, ``0``/``-1`` or the names ``principal``/``lower``."""
        if isinstance(value, cls):
            return value
        key = str(value).strip().lower()
        aliases = {
            "0": cls.PRINCIPAL, "w0": cls.PRINCIPAL, "principal": cls.PRINCIPAL,
            "-1": cls.LOWER, "w-1": cls.LOWER, "wm1": cls.LOWER, "lower": cls.LOWER,
        }
        try:
            return aliases[key]
        except KeyError:
            raise ValueError(f"unknown Lambert W branch {value!r}") from None


def _offset_from_branch_point(x: float) -> float:
    """Return ``x + 1/e`` without the cancellation of the naive sum."""
    d = (x + _INV_E_HI) + _INV_E_LO
    # float(-1/e) itself sits a hair below the true branch point
    if -4 * _EPS < d < 0.0:
        d = 0.0
    return d


def _branch_series(p: float, nterms: int = len(_BP_COEFFS)) -> float:
    acc = 0.0
    for a in reversed(_BP_COEFFS[:nterms]):
        acc = acc * p + a
    return acc


def _halley_direct(x: float, w: float) -> float:
    for _ in range(_MAX_ITER):
        ew = math.exp(w)
        f = w * ew - x
        wp1 = w + 1.0
        if wp1 == 0.0:
            return w
        dw = f / (ew * wp1 - (w + 2.0) * f / (2.0 * wp1))
        w -= dw
        if abs(dw) <= 4 * _EPS * (1.0 + abs(w)):
            return w
    raise RuntimeError(f"Lambert W Halley iteration did not converge for x={x!r}")


def _halley_branch_point(d: float, w: float) -> float:
    """Halley on ``w e^w + 1/e = d`` with ``d = x + 1/e`` known accurately.

    Writing ``t = w + 1`` gives ``w e^w + 1/e = (t e^t - expm1(t)) / e``,
    which keeps the residual free of cancellation near ``w = -1``.
    """
    for _ in range(_MAX_ITER):
        t = w + 1.0
        et = math.exp(t)
        f = (t * et - math.expm1(t)) * _INV_E_HI - d
        fp = t * et * _INV_E_HI
        if fp == 0.0:
            return w
        fpp = (t + 1.0) * et * _INV_E_HI
        dw = f / (fp - f * fpp / (2.0 * fp))
        w -= dw
        if abs(dw) <= 4 * _EPS * (1.0 + abs(w)):
            return w
    raise RuntimeError(f"Lambert W iteration did not converge near the branch point (d={d!r})")


def _halley_log(log_abs_x: float, w: float) -> float:
    """Solve ``w + log|w| = log|x|``; valid away from ``w = -1``."""
    for _ in range(_MAX_ITER):
        f = w + math.log(abs(w)) - log_abs_x
        fp = 1.0 + 1.0 / w
        fpp = -1.0 / (w * w)
        dw = f / (fp - f * fpp / (2.0 * fp))
        w -= dw
        if abs(dw) <= 4 * _EPS * (1.0 + abs(w)):
            return w
    raise RuntimeError(
        f"Lambert W log-form iteration did not converge for log|x|={log_abs_x!r}"
    )


def _w0_large(log_x: float) -> float:
    l1 = log_x
    l2 = math.log(l1)
    return _halley_log(log_x, l1 - l2 + l2 / l1)


def _w0(x: float) -> float:
    if math.isnan(x):
        return math.nan
    if x == math.inf:
        return math.inf
    d = _offset_from_branch_point(x)
    if d < 0.0:
        raise DomainError(f"W0 is real only for x >= -1/e, got {x!r}")
    if d < _SERIES_RADIUS:
        return _branch_series(math.sqrt(2.0 * math.e * d))
    if x == 0.0:
        return 0.0
    if x > math.e:
        w = _w0_large(math.log(x))
        # log(x) carries ~|log x| eps of rounding; one Newton step on
        # w - x e^{-w} = 0 removes it (x e^{-w} ~ w cannot overflow)
        return w - (w - x * math.exp(-w)) / (1.0 + w)
    if d < _NEAR_BP:
        return _halley_branch_point(d, _branch_series(math.sqrt(2.0 * math.e * d)))
    l1 = math.log1p(x)
    return _halley_direct(x, l1 * (1.0 - math.log1p(l1) / (2.0 + l1)))


def _wm1(x: float) -> float:
    if math.isnan(x):
        return math.nan
    if x >= 0.0:
        raise DomainError(f"W-1 is real only for -1/e <= x < 0, got {x!r}")
    d = _offset_from_branch_point(x)
    if d < 0.0:
        raise DomainError(f"W-1 is real only for -1/e <= x < 0, got {x!r}")
    if d < _SERIES_RADIUS:
        return _branch_series(-math.sqrt(2.0 * math.e * d))
    if x > -0.1:
        l1 = math.log(-x)
        l2 = math.log(-l1)
        return _halley_log(l1, l1 - l2 + l2 / l1)
    guess = _branch_series(-math.sqrt(2.0 * math.e * d))
    if d < _NEAR_BP:
        return _halley_branch_point(d, guess)
    return _halley_direct(x, guess)


_SCALAR = {WBranch.PRINCIPAL: _w0, WBranch.LOWER: _wm1}


def lambert_w(branch, x):
    """Evaluate a real branch of the Lambert W function.

    Parameters
    ----------
    branch : WBranch or {0, -1, "principal", "lower"}
    x : float or array_like

    Returns
    -------
    float or ndarray
        ``y`` with ``y * exp(y) == x`` on the requested branch.

    Raises
    ------
    DomainError
        ``x < -1/e`` on either branch, or ``x >= 0`` on the lower branch.
    """
    fn = _SCALAR[WBranch.parse(branch)]
    if np.ndim(x) == 0:
        return fn(float(x))
    arr = np.asarray(x, dtype=float)
    out = np.empty_like(arr)
    flat_in, flat_out = arr.ravel(), out.ravel()
    for i, xi in enumerate(flat_in):
        flat_out[i] = fn(float(xi))
    return out


def lambert_w0_exp(log_x: float) -> float:
    """Principal branch evaluated at ``exp(log_x)``.

    Useful when ``exp(log_x)`` overflows, e.g. ``W0(e**1e6)``.
    """
    if log_x > 1.0:
        return _w0_large(float(log_x))
    return _w0(math.exp(log_x))
