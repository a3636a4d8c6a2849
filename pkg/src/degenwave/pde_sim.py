"""Method-of-lines simulation of ``u_t = u^p (u_xx + u) - delta u``.

Second-order central differences in space, classical RK4 in time with a
diffusion-limited step, pinned Dirichlet values at both ends.  Intended only
to check that the traveling-wave profile translates at speed ``c`` over a
short horizon.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy.interpolate import PchipInterpolator

from .asymptotics import AsymptoticProfile, phi_of_xi
from .errors import BlowUpError, IntegrationError, PreconditionError
from .model import ModelParams
from .phase_dynamics import Orbit

__all__ = [
    "Grid1D",
    "FieldState",
    "SimulationResult",
    "FrontSpeedEstimate",
    "init_wave",
    "rhs",
    "simulate",
    "measure_front_speed",
    "BLOWUP_THRESHOLD",
    "BOUNDARY_MARGIN",
]

BLOWUP_THRESHOLD = 2.0
BOUNDARY_MARGIN = 10  # cells kept between a measured front and either boundary
SEAM_TOL = 1e-6


@dataclass(frozen=True)
class Grid1D:
    x_min: float
    x_max: float
    nx: int

    def __post_init__(self):
        if not self.x_min < self.x_max:
            raise PreconditionError("x_min must be below x_max")
        if int(self.nx) != self.nx or self.nx < 3:
            raise PreconditionError("nx must be an integer >= 3")

    @classmethod
    def from_spacing(cls, x_min: float, x_max: float, dx: float) -> "Grid1D":
        return cls(x_min, x_max, int(round((x_max - x_min) / dx)) + 1)

    @property
    def dx(self) -> float:
        return (self.x_max - self.x_min) / (self.nx - 1)

    @property
    def x(self) -> np.ndarray:
        return np.linspace(self.x_min, self.x_max, self.nx)


@dataclass(frozen=True)
class FieldState:
    time: float
    values: np.ndarray

    def __post_init__(self):
        v = np.array(self.values, dtype=float)
        if not np.all(np.isfinite(v)):
            raise IntegrationError(f"non-finite field values at t={self.time}")
        if np.any(v < 0):
            raise PreconditionError("field values must be non-negative")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)


@dataclass
class SimulationResult:
    snapshots: list[FieldState]
    clamp_count: int
    steps: int


@dataclass(frozen=True)
class FrontSpeedEstimate:
    level: float
    speed: float
    fit_residual: float
    samples: list = field(default_factory=list)


def init_wave(
    params: ModelParams, profile: AsymptoticProfile, orbit: Orbit, grid: Grid1D
) -> FieldState:
    """Sample the traveling-wave profile on the grid at ``t = 0`` (``xi = x``).

    Inside the orbit's ``xi`` range the profile is a PCHIP interpolant of
    the orbit; to the left the closed-form tail is used, to the right the
    plateau value 1.
    """
    if orbit.xi is None:
        raise PreconditionError("orbit has no xi values; run recover_xi first")
    if not math.isclose(profile.phi0, orbit.meta.get("phi0", profile.phi0), rel_tol=1e-12):
        raise PreconditionError("profile and orbit are anchored at different phi0")
    xi, phi = np.asarray(orbit.xi), np.asarray(orbit.phi)
    keep = np.concatenate([[True], np.diff(xi) > 0])
    xi, phi = xi[keep], phi[keep]

    rising = np.nonzero(phi > 1e-3)[0]
    settled = np.nonzero(np.abs(phi - 1.0) > 1e-3)[0]
    lo = xi[rising[0]] if rising.size else xi[0]
    hi = xi[settled[-1]] if settled.size else xi[-1]
    x = grid.x
    if x[0] > lo or x[-1] < hi:
        raise PreconditionError(
            f"grid [{x[0]}, {x[-1]}] does not cover the transition region [{lo:.3f}, {hi:.3f}]"
        )

    left_gap = abs(phi[0] - phi_of_xi(profile, xi[0]))
    right_gap = abs(phi[-1] - 1.0)
    if left_gap > SEAM_TOL or right_gap > SEAM_TOL:
        raise PreconditionError(
            f"profile seams not continuous (left {left_gap:.2e}, right {right_gap:.2e})"
        )

    interp = PchipInterpolator(xi, phi, extrapolate=False)
    u = np.empty_like(x)
    left, right = x < xi[0], x > xi[-1]
    mid = ~(left | right)
    u[mid] = interp(x[mid])
    u[left] = phi_of_xi(profile, x[left])
    u[right] = 1.0
    return FieldState(0.0, u)


def rhs(params: ModelParams, grid: Grid1D, field: FieldState | np.ndarray) -> np.ndarray:
    """Semi-discrete right-hand side; boundary nodes are pinned (zero rate)."""
    u = field.values if isinstance(field, FieldState) else np.asarray(field, dtype=float)
    out = np.zeros_like(u)
    ui = u[1:-1]
    lap = (u[:-2] - 2.0 * ui + u[2:]) / grid.dx**2
    out[1:-1] = ui**params.p * (lap + ui) - params.delta * ui
    return out


def simulate(
    params: ModelParams,
    grid: Grid1D,
    field: FieldState,
    t_end: float,
    safety: float = 0.4,
    *,
    snapshot_interval: Optional[float] = None,
    blowup_threshold: float = BLOWUP_THRESHOLD,
) -> SimulationResult:
    """Advance the field to ``t_end`` with RK4.

    ``dt = safety * dx**2 / max(1, max u**p)`` is recomputed every step and
    shortened to land on snapshot times.  Negative values produced by a step
    are clamped to zero and counted.  Raises :class:`BlowUpError` as soon as
    ``max u`` exceeds ``blowup_threshold``.
    """
    if not t_end > 0:
        raise PreconditionError("t_end must be positive")
    if not 0 < safety <= 0.5:
        raise PreconditionError("safety must lie in (0, 0.5]")
    interval = t_end if snapshot_interval is None else float(snapshot_interval)
    if not interval > 0:
        raise PreconditionError("snapshot_interval must be positive")

    n_snap = max(int(round(t_end / interval)), 1)
    targets = [min(k * interval, t_end) for k in range(1, n_snap + 1)]
    if targets[-1] < t_end:
        targets.append(t_end)

    u = np.array(field.values, dtype=float)
    t = float(field.time)
    t_stop = t + t_end
    targets = [t + tt for tt in targets]
    snapshots = [FieldState(t, u)]
    clamps = 0
    steps = 0
    dx2 = grid.dx**2

    def f(v):
        return rhs(params, grid, v)

    for target in targets:
        while t < target:
            dt = safety * dx2 / max(1.0, float(np.max(u**params.p)))
            last = t + dt >= target
            if last:
                dt = target - t
            k1 = f(u)
            k2 = f(u + 0.5 * dt * k1)
            k3 = f(u + 0.5 * dt * k2)
            k4 = f(u + dt * k3)
            u = u + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
            t = target if last else t + dt
            steps += 1
            if not np.all(np.isfinite(u)):
                raise IntegrationError(f"non-finite field at t={t}")
            neg = u < 0.0
            if np.any(neg):
                clamps += int(np.count_nonzero(neg))
                u[neg] = 0.0
            if np.max(u) > blowup_threshold:
                raise BlowUpError(
                    f"max u = {np.max(u):.4g} exceeded {blowup_threshold} at t={t:.6g}",
                    time=t,
                    snapshots=snapshots,
                )
        snapshots.append(FieldState(t, u))
    if abs(t - t_stop) > 1e-12 * max(1.0, abs(t_stop)):
        raise IntegrationError("time stepping did not land on t_end")
    return SimulationResult(snapshots, clamps, steps)


def _crossing(x: np.ndarray, u: np.ndarray, level: float, window: slice) -> float:
    xs, us = x[window], u[window] - level
    sign = np.sign(us)
    idx = np.nonzero(sign[:-1] * sign[1:] < 0)[0]
    exact = np.nonzero(us == 0.0)[0]
    count = idx.size + exact.size
    if count != 1:
        raise PreconditionError(f"expected exactly one crossing of {level}, found {count}")
    if exact.size:
        return float(xs[exact[0]])
    i = int(idx[0])
    return float(xs[i] - us[i] * (xs[i + 1] - xs[i]) / (us[i + 1] - us[i]))


def measure_front_speed(
    snapshots: Sequence[FieldState],
    grid: Grid1D,
    level: float,
    window: Optional[tuple[float, float]] = None,
) -> FrontSpeedEstimate:
    """Least-squares speed of the level crossing across snapshots.

    Crossings are located by linear interpolation between the bracketing
    nodes and must stay ``BOUNDARY_MARGIN`` cells away from the ends of the
    monitored window (default: the whole grid).
    """
    if len(snapshots) < 3:
        raise PreconditionError("need at least 3 snapshots")
    x = grid.x
    if window is None:
        sl = slice(0, grid.nx)
    else:
        i0 = int(np.searchsorted(x, window[0], side="left"))
        i1 = int(np.searchsorted(x, window[1], side="right"))
        sl = slice(i0, i1)
    x_lo = x[sl][0] + BOUNDARY_MARGIN * grid.dx
    x_hi = x[sl][-1] - BOUNDARY_MARGIN * grid.dx
    samples = []
    for snap in snapshots:
        pos = _crossing(x, snap.values, level, sl)
        if not x_lo <= pos <= x_hi:
            raise PreconditionError(
                f"front at x={pos:.3f} is within {BOUNDARY_MARGIN} cells of the window edge"
            )
        samples.append((float(snap.time), pos))
    t = np.array([s[0] for s in samples])
    pos = np.array([s[1] for s in samples])
    dt = t - t.mean()
    if not np.any(dt != 0.0):
        raise PreconditionError("snapshot times must not all coincide")
    # centered normal equations: a motionless front gives exactly zero
    dp = pos - pos.mean()
    slope = float(np.dot(dt, dp) / np.dot(dt, dt))
    rms = float(np.sqrt(np.mean((dp - slope * dt) ** 2)))
    return FrontSpeedEstimate(float(level), float(slope), rms, samples)
