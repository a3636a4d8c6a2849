"""Closed forms for the traveling-wave tail as ``xi -> -inf``.

Along the reduced flow, ``w = phi**(-p)`` obeys ``w' = A + B/w`` with
``A = -p/c < 0`` and ``B = p (c^2+1)/c^3 > 0``.  Its solution is expressed
with the principal Lambert W branch, and ``dxi/ds = phi**p = 1/w`` links
``s`` back to the wave coordinate.  Integrating ``dxi = dphi / h(phi)`` in
closed form gives ``xi(phi)``; inverting it yields the profile

    phi(xi) = (mu c^2 / (mu (c^2+1) - exp(-p xi / c))) ** (1/p),   mu < 0.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.integrate import quad

from .errors import PreconditionError, QuadratureError, SingularityError
from .model import ModelParams
from .special_functions import lambert_w0_exp

__all__ = [
    "WTransform",
    "AsymptoticProfile",
    "make_w_transform",
    "log_E",
    "phi_of_s",
    "ds_dxi",
    "verify_xi_divergence",
    "xi_of_phi",
    "make_profile",
    "phi_of_xi",
    "leading_order",
]


@dataclass(frozen=True)
class WTransform:
    """Constants of the ``w = phi**(-p)`` solution anchored at ``w(0) = phi0**(-p)``.

    ``E(s) = -(A/B) exp(-(A^2/B) s - (A^2 C1 + B)/B)`` is kept in log form,
    ``log E(s) = log_E0 - (A^2/B) s``, because it overflows for very negative s.
    """

    params: ModelParams
    phi0: float
    A: float
    B: float
    C1: float
    C2: float
    log_E0: float


@dataclass(frozen=True)
class AsymptoticProfile:
    params: ModelParams
    phi0: float
    mu: float
    C3: float


def _ab(params: ModelParams) -> tuple[float, float]:
    p, c = params.p, params.c
    return -p / c, p * (c * c + 1.0) / c**3


def make_w_transform(params: ModelParams, phi0: float) -> WTransform:
    """Fix the integration constant ``C1`` so that ``phi(s=0) = phi0``.

    With ``y = -(A w / B + 1)`` the implicit solution reads ``y e^y = E(s)``;
    at ``s = 0`` this gives ``log E(0) = log y0 + y0``.
    """
    if not phi0 > 0:
        raise PreconditionError("phi0 must be positive")
    A, B = _ab(params)
    w0 = phi0 ** (-params.p)
    y0 = -(A * w0 / B + 1.0)
    if not y0 > 0:
        raise PreconditionError(
            f"phi0={phi0} outside the asymptotic regime: need phi0**p < c^2/(c^2+1) "
            f"(A w0/B + 1 = {-y0:.6g} must be negative)"
        )
    log_e0 = math.log(y0) + y0
    # log E(0) = log(-A/B) - (A^2 C1 + B)/B
    C1 = (B / (A * A)) * (math.log(-A / B) - log_e0 - 1.0)
    C2 = math.log(-A / B) - (A * A * C1 + B) / B + 1.0
    return WTransform(params, float(phi0), A, B, C1, C2, log_e0)


def log_E(wt: WTransform, s):
    return wt.log_E0 - (wt.A * wt.A / wt.B) * np.asarray(s, dtype=float)


def _w_of_s(wt: WTransform, s: float) -> float:
    # E(s) > 0 and W(E) + 1 = -A w / B > 0 single out the principal branch
    W = lambert_w0_exp(float(log_E(wt, s)))
    return -wt.B * (W + 1.0) / wt.A


def ds_dxi(wt: WTransform, s):
    """``ds/dxi = phi**(-p) = -B (W0(E(s)) + 1) / A``; always positive."""
    if np.ndim(s) == 0:
        return _w_of_s(wt, float(s))
    return np.array([_w_of_s(wt, float(si)) for si in np.ravel(s)]).reshape(np.shape(s))


def phi_of_s(wt: WTransform, params: ModelParams, s):
    """Reduced-flow solution ``phi(s)`` through the Lambert W closed form."""
    return ds_dxi(wt, s) ** (-1.0 / params.p)


def _xi_breakpoints(a: float, b: float) -> list[float]:
    """Split ``[a, b]`` (``b <= 0``) on a log grid so quad sees mild panels."""
    pts = {a, b}
    lo, hi = -a, max(-b, 1.0)
    if lo > hi:
        for k in range(int(math.floor(math.log10(hi))), int(math.ceil(math.log10(lo))) + 1):
            for m in (1.0, 3.0):
                x = -m * 10.0**k
                if a < x < b:
                    pts.add(x)
    return sorted(pts)


def verify_xi_divergence(
    wt: WTransform, params: ModelParams, s_targets: Sequence[float]
) -> list[tuple[float, float]]:
    """``xi(s) = -int_s^0 ds' / w(s')`` at each (non-positive) target.

    Targets are processed in decreasing order so each integral extends the
    previous one.  Raises :class:`QuadratureError` when quad's error
    estimate exceeds ``1e-10 (1 + |xi|)``.
    """
    targets = [float(s) for s in s_targets]
    if any(s > 0 for s in targets):
        raise PreconditionError("s targets must be non-positive")
    order = sorted(range(len(targets)), key=lambda i: -targets[i])
    results = [0.0] * len(targets)

    def integrand(s):
        return 1.0 / _w_of_s(wt, s)

    xi, s_prev = 0.0, 0.0
    for i in order:
        s = targets[i]
        if s < s_prev:
            pts = _xi_breakpoints(s, s_prev)
            for a, b in zip(pts[:-1], pts[1:]):
                val, err = quad(integrand, a, b, epsabs=1e-13, epsrel=1e-12, limit=200)
                if not math.isfinite(val) or err > 1e-10 * (1.0 + abs(val)):
                    raise QuadratureError(f"quad failed on [{a}, {b}]: err={err:.3g}")
                xi -= val
            s_prev = s
        results[i] = xi
    return list(zip(targets, results))


def _log_ratio(params: ModelParams, phi) -> np.ndarray:
    """``log |phi^p / ((c^2+1) phi^p - c^2)|``, rejecting the pole."""
    c2 = params.c**2
    u = np.asarray(phi, dtype=float) ** params.p
    den = (c2 + 1.0) * u - c2
    if np.any(den == 0.0):
        raise SingularityError("phi**p = c^2/(c^2+1) is a pole of xi(phi)")
    return np.log(np.abs(u / den))


def _C3(params: ModelParams, phi0: float) -> float:
    return float(params.c / params.p * _log_ratio(params, phi0))


def xi_of_phi(params: ModelParams, phi0: float, phi):
    """Wave coordinate at which the reduced orbit anchored at ``phi0`` reaches ``phi``.

    ``xi + C3 = (c/p) log |phi^p / ((c^2+1) phi^p - c^2)|`` with ``C3`` fixed
    by ``xi(phi0) = 0``.  Both arguments must lie below ``plateau_phi``.
    """
    bound = params.plateau_phi
    phi_arr = np.asarray(phi, dtype=float)
    if not 0 < phi0 or np.any(phi_arr <= 0):
        raise PreconditionError("phi and phi0 must be positive")
    if phi0 == bound or np.any(phi_arr == bound):
        raise SingularityError("phi**p = c^2/(c^2+1) is a pole of xi(phi)")
    if phi0 > bound or np.any(phi_arr > bound):
        raise PreconditionError("phi and phi0 must lie on the same side of the pole, below it")
    out = params.c / params.p * _log_ratio(params, phi_arr) - _C3(params, phi0)
    return float(out) if out.ndim == 0 else out


def make_profile(params: ModelParams, phi0: float) -> AsymptoticProfile:
    """Profile constants for the anchor ``phi(0) = phi0``.

    The sign of ``mu`` is forced negative: ``mu > 0`` would put a pole at a
    finite ``xi``, which the (regular) traveling wave cannot have.
    """
    if not 0 < phi0 < params.anchor_bound:
        raise PreconditionError(
            f"phi0 must lie in (0, {params.anchor_bound:.6g}) = (0, (c^2/(c^2+2))^(1/p))"
        )
    c2 = params.c**2
    u0 = phi0**params.p
    mu = -abs(u0 / ((c2 + 1.0) * u0 - c2))
    return AsymptoticProfile(params, float(phi0), mu, _C3(params, phi0))


def phi_of_xi(profile: AsymptoticProfile, xi):
    """Evaluate the closed-form profile with the positive real p-th root.

    For ``xi <= 0`` the equivalent form
    ``log phi = xi/c + (log(-mu c^2) - log1p(-mu (c^2+1) e^{p xi/c})) / p``
    avoids overflowing ``exp(-p xi / c)``.
    """
    p, c, mu = profile.params.p, profile.params.c, profile.mu
    c2 = c * c
    x = np.asarray(xi, dtype=float)
    with np.errstate(over="ignore", under="ignore"):
        neg = np.minimum(x, 0.0)
        log_phi_neg = neg / c + (math.log(-mu * c2) - np.log1p(-mu * (c2 + 1.0) * np.exp(p * neg / c))) / p
        pos = np.maximum(x, 0.0)
        phi_pos = (mu * c2 / (mu * (c2 + 1.0) - np.exp(-p * pos / c))) ** (1.0 / p)
    # rounding can overshoot the plateau by an ulp for large xi
    phi_pos = np.minimum(phi_pos, profile.params.plateau_phi)
    out = np.where(x <= 0.0, np.exp(log_phi_neg), phi_pos)
    return float(out) if out.ndim == 0 else out


def leading_order(profile: AsymptoticProfile, xi):
    """First term ``(-mu)^(1/p) c^(2/p) e^(xi/c)`` of the profile as ``xi -> -inf``."""
    p, c = profile.params.p, profile.params.c
    out = (-profile.mu) ** (1.0 / p) * c ** (2.0 / p) * np.exp(np.asarray(xi, dtype=float) / c)
    return float(out) if out.ndim == 0 else out
