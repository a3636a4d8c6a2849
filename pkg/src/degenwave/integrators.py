"""Dormand-Prince 5(4) integrator with PI step-size control.

Written for the small planar systems of this package: the state is a short
numpy vector, the right-hand side a plain Python callable.  Besides the
accepted step endpoints the solver records extra points from the continuous
extension so that piecewise-linear interpolation of the returned samples
stays within a prescribed bound.
"""
from __future__ import annotations

import math
import sys
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .errors import IntegrationError

__all__ = ["RKResult", "dopri54"]

_EPS = sys.float_info.epsilon

C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0])
A = (
    (),
    (1 / 5,),
    (3 / 40, 9 / 40),
    (44 / 45, -56 / 15, 32 / 9),
    (19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729),
    (9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656),
)
B = np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0])
# 5th-order minus embedded 4th-order weights (7 stages, FSAL)
E = np.array([-71 / 57600, 0.0, 71 / 16695, -71 / 1920, 17253 / 339200, -22 / 525, 1 / 40])
# Continuous extension (Shampine 1986): y(t0 + th*h) = y0 + h * K.T @ (P @ [th, th^2, th^3, th^4])
P = np.array([
    [1, -8048581381 / 2820520608, 8663915743 / 2820520608, -12715105075 / 11282082432],
    [0, 0, 0, 0],
    [0, 131558114200 / 32700410799, -68118460800 / 10900136933, 87487479700 / 32700410799],
    [0, -1754552775 / 470086768, 14199869525 / 1410260304, -10690763975 / 1880347072],
    [0, 127303824393 / 49829197408, -318862633887 / 49829197408, 701980252875 / 199316789632],
    [0, -282668133 / 205662961, 2019193451 / 616988883, -1453857185 / 822651844],
    [0, 40617522 / 29380423, -110615467 / 29380423, 69997945 / 29380423],
])

_SAFETY = 0.9
_ALPHA = 0.17  # 1/5 - 0.75 * beta
_BETA = 0.04
_MIN_FACTOR = 0.2
_MAX_FACTOR = 5.0


@dataclass
class RKResult:
    t: np.ndarray
    y: np.ndarray
    status: str  # "completed" or the reason returned by the stop callback
    nfev: int = 0
    naccept: int = 0
    nreject: int = 0
    step_ends: list = field(default_factory=list)


def _dense(y0, h, K, theta):
    powers = np.array([theta, theta**2, theta**3, theta**4])
    return y0 + h * (K.T @ (P @ powers))


def _initial_step(fun, t0, y0, f0, direction, rtol, atol):
    scale = atol + np.abs(y0) * rtol
    d0 = np.max(np.abs(y0) / scale)
    d1 = np.max(np.abs(f0) / scale)
    h0 = 1e-6 if d0 < 1e-5 or d1 < 1e-5 else 0.01 * d0 / d1
    y1 = y0 + direction * h0 * f0
    f1 = fun(t0 + direction * h0, y1)
    d2 = np.max(np.abs(f1 - f0) / scale) / h0
    if max(d1, d2) <= 1e-15:
        h1 = max(1e-6, h0 * 1e-3)
    else:
        h1 = (0.01 / max(d1, d2)) ** (1 / 5)
    return min(100 * h0, h1)


def dopri54(
    fun: Callable[[float, np.ndarray], np.ndarray],
    t0: float,
    y0,
    t_end: float,
    rtol: float,
    atol,
    *,
    dense_tol: Optional[float] = None,
    stop: Optional[Callable[[float, np.ndarray], Optional[str]]] = None,
    max_steps: int = 1_000_000,
    h_max: float = math.inf,
) -> RKResult:
    """Integrate ``y' = fun(t, y)`` from ``t0`` towards ``t_end``.

    A step is accepted when every component of the embedded error estimate
    satisfies ``|err_i| <= atol_i + rtol * max(|y_i|, |y_new_i|)``.

    ``dense_tol`` (absolute, scaled like the step tolerance) inserts
    continuous-extension points inside a step whenever the chord midpoint
    deviates from the interpolant by more than this amount.  ``stop`` is
    called after each accepted step; a non-``None`` return ends the
    integration and becomes ``status``.
    """
    y = np.array(y0, dtype=float)
    n = y.size
    atol = np.broadcast_to(np.asarray(atol, dtype=float), (n,))
    t = float(t0)
    t_end = float(t_end)
    direction = 1.0 if t_end >= t else -1.0
    if not np.all(np.isfinite(y)):
        raise IntegrationError(f"non-finite initial state {y}")

    ts, ys = [t], [y.copy()]
    step_ends = [0]
    nfev = 0
    f = np.asarray(fun(t, y), dtype=float)
    nfev += 1
    if stop is not None:
        reason = stop(t, y)
        if reason is not None:
            return RKResult(np.array(ts), np.array(ys), reason, nfev, 0, 0, step_ends)
    if t == t_end:
        return RKResult(np.array(ts), np.array(ys), "completed", nfev, 0, 0, step_ends)

    h = min(_initial_step(fun, t, y, f, direction, rtol, atol), h_max)
    nfev += 1
    err_prev = 1e-4
    naccept = nreject = 0
    K = np.empty((7, n))
    status = "completed"

    while direction * (t_end - t) > 0:
        if naccept + nreject >= max_steps:
            raise IntegrationError(f"step budget exhausted at t={t}")
        h_min = 16 * _EPS * max(abs(t), 1.0)
        if h < h_min:
            raise IntegrationError(
                f"step size underflow at t={t} (h={h:.3e}); stiffness or singularity"
            )
        h = min(h, abs(t_end - t))
        hs = direction * h
        K[0] = f
        for i in range(1, 6):
            dy = hs * (np.asarray(A[i]) @ K[:i])
            K[i] = fun(t + C[i] * hs, y + dy)
        y_new = y + hs * (B[:6] @ K[:6])
        t_new = t + hs if h < abs(t_end - t) else t_end
        f_new = np.asarray(fun(t_new, y_new), dtype=float)
        K[6] = f_new
        nfev += 6
        if not np.all(np.isfinite(y_new)) or not np.all(np.isfinite(f_new)):
            h *= 0.25
            nreject += 1
            if not np.all(np.isfinite(y)):
                raise IntegrationError(f"non-finite state at t={t}")
            continue

        scale = atol + rtol * np.maximum(np.abs(y), np.abs(y_new))
        err = np.max(np.abs(hs * (E @ K)) / scale)

        if err <= 1.0:
            if dense_tol is not None:
                mid = _dense(y, hs, K, 0.5)
                dev = np.max(np.abs(mid - 0.5 * (y + y_new)) / np.maximum(1.0, np.abs(mid)))
                if dev > dense_tol:
                    m = int(math.ceil(math.sqrt(2.0 * dev / dense_tol)))
                    for k in range(1, m):
                        theta = k / m
                        ts.append(t + theta * hs)
                        ys.append(_dense(y, hs, K, theta))
            t, y, f = t_new, y_new, f_new
            ts.append(t)
            ys.append(y.copy())
            step_ends.append(len(ts) - 1)
            naccept += 1
            err_c = max(err, 1e-10)
            factor = _SAFETY * err_c ** (-_ALPHA) * err_prev ** _BETA
            factor = min(_MAX_FACTOR, max(_MIN_FACTOR, factor))
            err_prev = err_c
            h = min(h * factor, h_max)
            if stop is not None:
                reason = stop(t, y)
                if reason is not None:
                    status = reason
                    break
        else:
            nreject += 1
            h *= max(_MIN_FACTOR, _SAFETY * err ** (-1 / 5))

    return RKResult(np.array(ts), np.array(ys), status, nfev, naccept, nreject, step_ends)
