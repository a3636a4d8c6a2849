"""Planar traveling-wave systems, equilibria, orbits and xi recovery.

Two parameterizations of the same orbits are used throughout:

* the wave coordinate ``xi``::

      phi' = psi
      psi' = -c phi**(-p) psi - phi + delta phi**(1 - p)

  singular on the line ``phi = 0``;

* the desingularized time ``s`` with ``ds/dxi = phi**(-p)``::

      phi' = phi**p psi
      psi' = -c psi - phi**(p + 1) + delta phi

  a polynomial field with the degenerate equilibrium ``E_O = (0, 0)``.

For ``phi != 0`` both fields point along the same direction, so orbits agree
and only their time labels differ.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Iterator, Optional, Sequence

import numpy as np
from scipy.integrate import solve_ivp

from .center_manifold import cm_graph
from .errors import IntegrationError, PreconditionError, SingularityError
from .integrators import dopri54
from .model import ModelParams, PhaseState

__all__ = [
    "TimeParam",
    "Orbit",
    "Classification",
    "EquilibriumInfo",
    "vector_field_xi",
    "vector_field_s",
    "jacobian_xi",
    "jacobian_s",
    "equilibria",
    "integrate",
    "recover_xi",
    "connecting_orbit",
    "direction_grid",
    "EQUILIBRIUM_RADIUS",
    "XI_PHI_FLOOR",
]

EQUILIBRIUM_RADIUS = 1e-12
XI_PHI_FLOOR = 1e-8
GRAPH_SWITCH = 0.5  # fraction of plateau_phi where the forward solver takes over


class TimeParam(enum.Enum):
    XI = "xi"
    S = "s"


class Classification(enum.Enum):
    SPIRAL_SINK = "SpiralSink"
    NODE_SINK = "NodeSink"
    CENTER_DEGENERATE = "CenterDegenerate"


def _readonly(a) -> np.ndarray:
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class Orbit:
    """Sampled trajectory of one of the planar systems.

    ``t`` is ``xi`` or ``s`` depending on ``param``; ``xi`` is filled only for
    ``s``-orbits after :func:`recover_xi` (or by :func:`connecting_orbit`).
    """

    param: TimeParam
    t: np.ndarray
    phi: np.ndarray
    psi: np.ndarray
    xi: Optional[np.ndarray] = None
    status: str = "completed"
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        t, phi, psi = _readonly(self.t), _readonly(self.phi), _readonly(self.psi)
        if not (t.shape == phi.shape == psi.shape) or t.ndim != 1:
            raise ValueError("t, phi and psi must be 1-D arrays of equal length")
        if t.size > 1:
            dt = np.diff(t)
            if not (np.all(dt > 0) or np.all(dt < 0)):
                raise ValueError("orbit times must be strictly monotone")
        object.__setattr__(self, "t", t)
        object.__setattr__(self, "phi", phi)
        object.__setattr__(self, "psi", psi)
        if self.xi is not None:
            xi = _readonly(self.xi)
            if xi.shape != t.shape:
                raise ValueError("xi must align with the samples")
            object.__setattr__(self, "xi", xi)

    def __len__(self) -> int:
        return int(self.t.size)

    @property
    def samples(self) -> Iterator[tuple[float, PhaseState]]:
        for ti, a, b in zip(self.t, self.phi, self.psi):
            yield float(ti), PhaseState(float(a), float(b))

    @property
    def end(self) -> PhaseState:
        return PhaseState(float(self.phi[-1]), float(self.psi[-1]))

    def with_xi(self, xi) -> "Orbit":
        return Orbit(self.param, self.t, self.phi, self.psi, xi, self.status, dict(self.meta))


@dataclass(frozen=True)
class EquilibriumInfo:
    location: PhaseState
    jacobian: np.ndarray
    eigenvalues: tuple[complex, complex]
    classification: Classification
    system: TimeParam
    repeated: bool = False


def _state(state) -> tuple[float, float]:
    phi, psi = state
    return float(phi), float(psi)


def vector_field_xi(params: ModelParams, state) -> tuple[float, float]:
    """Right-hand side of the ``xi``-system at ``state = (phi, psi)``."""
    phi, psi = _state(state)
    if phi == 0.0:
        raise SingularityError("the xi-parameterized field is singular on phi = 0")
    p, c, d = params.p, params.c, params.delta
    inv = phi ** (-p)
    return psi, -c * inv * psi - phi + d * inv * phi


def vector_field_s(params: ModelParams, state) -> tuple[float, float]:
    """Right-hand side of the desingularized ``s``-system."""
    phi, psi = _state(state)
    p, c, d = params.p, params.c, params.delta
    php = phi**p
    return php * psi, -c * psi - php * phi + d * phi


def jacobian_xi(params: ModelParams, state) -> np.ndarray:
    phi, psi = _state(state)
    if phi == 0.0:
        raise SingularityError("the xi-parameterized field is singular on phi = 0")
    p, c, d = params.p, params.c, params.delta
    return np.array([
        [0.0, 1.0],
        [p * c * phi ** (-p - 1) * psi - 1.0 + d * (1 - p) * phi ** (-p), -c * phi ** (-p)],
    ])


def jacobian_s(params: ModelParams, state) -> np.ndarray:
    phi, psi = _state(state)
    p, c, d = params.p, params.c, params.delta
    return np.array([
        [p * phi ** (p - 1) * psi, phi**p],
        [-(p + 1) * phi**p + d, -c],
    ])


def _classify_sink(params: ModelParams, jac: np.ndarray):
    eig = np.linalg.eigvals(jac)
    eig = tuple(sorted((complex(e) for e in eig), key=lambda z: (z.real, z.imag)))
    disc = params.discriminant
    if disc < 0:
        return eig, Classification.SPIRAL_SINK, False
    return eig, Classification.NODE_SINK, disc == 0


def equilibria(params: ModelParams) -> list[EquilibriumInfo]:
    """Bounded equilibria: ``E_O`` always, ``+-E_delta = (+-1, 0)`` when delta = 1.

    ``E_O`` is analysed in the ``s``-system (eigenvalues ``0`` and ``-c``);
    ``+-E_delta`` in the ``xi``-system, where the Jacobian is
    ``[[0, 1], [-p, -c]]`` and the discriminant ``c^2 - 4p`` separates
    spirals from nodes.
    """
    origin = PhaseState(0.0, 0.0)
    j0 = jacobian_s(params, origin)
    e0 = tuple(sorted((complex(e) for e in np.linalg.eigvals(j0)), key=lambda z: z.real))
    out = [EquilibriumInfo(origin, j0, e0, Classification.CENTER_DEGENERATE, TimeParam.S)]
    if params.delta == 1:
        for sign in (1.0, -1.0):
            loc = PhaseState(sign, 0.0)
            jac = jacobian_xi(params, loc)
            eig, cls, rep = _classify_sink(params, jac)
            out.append(EquilibriumInfo(loc, jac, eig, cls, TimeParam.XI, rep))
    return out


def _rhs(params: ModelParams, which: TimeParam):
    p, c, d = params.p, params.c, params.delta
    if which is TimeParam.S:
        def f(_t, y):
            phi, psi = y
            php = phi**p
            return np.array([php * psi, -c * psi - php * phi + d * phi])
    else:
        def f(_t, y):
            phi, psi = y
            inv = phi ** (-p)
            return np.array([psi, -c * inv * psi - phi + d * inv * phi])
    return f


def integrate(
    params: ModelParams,
    which: TimeParam,
    start,
    t_span: tuple[float, float],
    tol: float,
    *,
    rtol: Optional[float] = None,
) -> Orbit:
    """Adaptive Dormand-Prince integration of either planar system.

    ``tol`` bounds the local error per step (absolute, and relative unless
    ``rtol`` is given); extra dense-output samples keep linear interpolation
    within ``10 * tol``.  Integration ends early when the state comes within
    ``EQUILIBRIUM_RADIUS`` (max norm) of an equilibrium, or, for the
    ``xi``-system, when ``|phi|`` drops below ``XI_PHI_FLOOR``.

    Near a sink the numerical state settles only to about ``tol``, so
    equilibrium termination needs ``tol`` well below ``EQUILIBRIUM_RADIUS``;
    with looser tolerances the orbit simply runs to the end of ``t_span``.
    """
    if not tol > 0:
        raise PreconditionError("tol must be positive")
    which = TimeParam(which)
    phi0, psi0 = _state(start)
    if which is TimeParam.XI and phi0 == 0.0:
        raise SingularityError("xi-mode integration cannot start on phi = 0")
    eq_points = [(e.location.phi, e.location.psi) for e in equilibria(params)]
    if which is TimeParam.XI:
        eq_points = [q for q in eq_points if q[0] != 0.0]

    def stop(_t, y):
        for a, b in eq_points:
            if max(abs(y[0] - a), abs(y[1] - b)) < EQUILIBRIUM_RADIUS:
                return "equilibrium"
        if which is TimeParam.XI and abs(y[0]) < XI_PHI_FLOOR:
            return "phi_to_zero"
        return None

    t0, t1 = map(float, t_span)
    f = _rhs(params, which)
    y0 = np.array([phi0, psi0])
    if np.all(f(t0, y0) == 0.0):
        # exact equilibrium: the orbit is constant
        return Orbit(which, [t0, t1], [phi0, phi0], [psi0, psi0], status="equilibrium")
    res = dopri54(
        f, t0, y0, t1,
        rtol=tol if rtol is None else rtol,
        atol=tol,
        dense_tol=10 * tol,
        stop=stop,
    )
    orbit = Orbit(which, res.t, res.y[:, 0], res.y[:, 1], status=res.status,
                  meta={"nfev": res.nfev, "steps": res.naccept, "rejected": res.nreject})
    return orbit


def recover_xi(
    params: ModelParams,
    orbit: Orbit,
    phi0: Optional[float] = None,
    anchor_index: Optional[int] = None,
) -> Orbit:
    """Attach ``xi`` to an ``s``-orbit by trapezoidal quadrature of ``phi**p``.

    ``xi`` is zero at the anchor sample: ``anchor_index`` if given, otherwise
    the sample whose ``phi`` is closest to ``phi0``.
    """
    if TimeParam(orbit.param) is not TimeParam.S:
        raise PreconditionError("xi recovery needs an s-parameterized orbit")
    if len(orbit) == 0:
        raise PreconditionError("empty orbit")
    if anchor_index is None:
        if phi0 is None:
            raise PreconditionError("an anchor (phi0 or anchor_index) is required")
        anchor_index = int(np.argmin(np.abs(orbit.phi - phi0)))
    if not -len(orbit) <= anchor_index < len(orbit):
        raise PreconditionError(f"anchor index {anchor_index} out of range")
    g = orbit.phi ** params.p
    increments = 0.5 * (g[1:] + g[:-1]) * np.diff(orbit.t)
    xi = np.concatenate([[0.0], np.cumsum(increments)])
    xi -= xi[anchor_index]
    return orbit.with_xi(xi)


# --- connecting orbit -----------------------------------------------------


def _graph_branch(params: ModelParams, phi_lo: float, phi0: float, phi_hi: float, xi_step: float):
    """Orbit of the s-system leaving E_O, written as a graph over ``u = phi**p``.

    Backward integration in ``s`` from a point near E_O is exponentially
    unstable (the transverse eigenvalue is ``-c``), so the branch is obtained
    from the invariance equation of ``psi = phi q(u)``::

        dq/dtau = (1 - u - c q - u q**2) / (p u q),    tau = log u,
        dxi/dtau = 1 / (p q)

    integrated upward in ``u`` from ``phi_lo`` to ``phi_hi``.  That direction
    is the stable one, so the seed error on the truncated manifold graph
    decays instead of growing.  The equation is stiff (rate ~ c/(p u)),
    hence the implicit Radau solver.  ``s`` and ``xi`` vanish at ``phi0``.
    """
    p, c = params.p, params.c
    tau_lo, tau0, tau_hi = (p * math.log(v) for v in (phi_lo, phi0, phi_hi))
    u_lo = math.exp(tau_lo)
    q_seed = cm_graph(params, phi_lo, warn=False) / phi_lo

    def f(tau, y):
        u = math.exp(tau)
        q = y[0]
        return [(1.0 - u - c * q - u * q * q) / (p * u * q), 1.0 / (p * q)]

    def jac(tau, y):
        u = math.exp(tau)
        q = y[0]
        num = 1.0 - u - c * q - u * q * q
        dq = ((-c - 2.0 * u * q) * q - num) / (p * u * q * q)
        return [[dq, 0.0], [-1.0 / (p * q * q), 0.0]]

    sol = solve_ivp(f, (tau_lo, tau_hi), [q_seed, 0.0], method="Radau", jac=jac,
                    rtol=1e-13, atol=[1e-15, 1e-15], dense_output=True)
    if not sol.success:
        raise IntegrationError(f"center-manifold branch failed: {sol.message}")
    if np.any(sol.y[0] <= 0):
        raise IntegrationError("orbit left the psi > 0 half-plane on the graph branch")

    # sample roughly uniformly in xi; tau0 is always a node
    def nodes(a, b):
        n = max(int(math.ceil((b - a) * c / (p * xi_step))), 8)
        return np.linspace(a, b, n + 1)

    below = nodes(tau_lo, tau0)
    above = nodes(tau0, tau_hi)[1:] if tau_hi > tau0 else np.empty(0)
    tau = np.concatenate([below, above])
    k = below.size - 1
    y = sol.sol(tau)
    y[:, 0] = sol.y[:, 0]
    y[:, -1] = sol.y[:, -1]
    q, xi = y[0], y[1] - sol.sol(tau0)[1]

    # s from the anchor: ds/dtau = exp(-tau) / (p q); accumulated outward
    # from tau0 on each side so values near the anchor keep full precision
    gl_x, gl_w = np.polynomial.legendre.leggauss(8)
    a, b = tau[:-1], tau[1:]
    mid, half = 0.5 * (a + b), 0.5 * (b - a)
    tt = mid[:, None] + half[:, None] * gl_x[None, :]
    qq = sol.sol(tt.ravel())[0].reshape(tt.shape)
    seg = half * np.sum(gl_w * np.exp(-tt) / (p * qq), axis=1)
    s = np.concatenate([-np.cumsum(seg[:k][::-1])[::-1], [0.0], np.cumsum(seg[k:])])

    phi = np.exp(tau / p)
    phi[k] = phi0
    xi[k] = 0.0
    meta = {"u_seed": u_lo, "q_seed": q_seed, "radau_nfev": int(sol.nfev), "anchor_index": k}
    return s, phi, phi * q, xi, meta


def connecting_orbit(
    params: ModelParams,
    phi0: float,
    tol: float = 1e-10,
    *,
    backward_ratio: float = 1e-4,
    phi_min: Optional[float] = None,
    xi_step: float = 0.02,
    s_span: float = 1e4,
) -> Orbit:
    """Traveling-wave orbit from ``E_O`` to ``E_delta = (1, 0)``.

    The orbit is anchored at ``phi = phi0`` where ``s = xi = 0``.  From
    ``phi_min`` (default ``phi0 * backward_ratio``) up to
    ``max(phi0, GRAPH_SWITCH * plateau_phi)`` it is computed as the
    center-manifold graph; from there the ``s``-system is integrated
    forward for at most ``s_span`` until it settles on ``(1, 0)``.  ``xi``
    is carried as an extra component (``dxi/ds = phi**p``) on that part.
    """
    if params.delta != 1:
        raise PreconditionError("connecting orbits to E_delta exist only for delta = 1")
    if not 0.0 < phi0 < params.anchor_bound:
        raise PreconditionError(
            f"phi0 must lie in (0, {params.anchor_bound:.6g}) for p={params.p}, c={params.c}"
        )
    if phi_min is None:
        phi_min = phi0 * backward_ratio
    if not 0.0 < phi_min < phi0:
        raise PreconditionError("phi_min must lie in (0, phi0)")

    # above phi0 the graph form is kept up to phi_switch: near E_O the
    # s-system is stiff (slow drift ~ phi**(p+1) against rate -c), which
    # would cost an explicit solver O(phi0**-p) steps
    phi_switch = max(phi0, GRAPH_SWITCH * params.plateau_phi)
    s_b, phi_b, psi_b, xi_b, meta = _graph_branch(params, phi_min, phi0, phi_switch, xi_step)

    p, c = params.p, params.c

    def f(_t, y):
        phi, psi, _ = y
        php = phi**p
        return np.array([php * psi, -c * psi - php * phi + phi, php])

    def stop(_t, y):
        if max(abs(y[0] - 1.0), abs(y[1])) < EQUILIBRIUM_RADIUS:
            return "equilibrium"
        if y[0] <= 0.0:
            return "phi_nonpositive"
        return None

    # the detection radius is below typical tolerances; near the sink the
    # explicit steps sit at their stability limit and hover at ~atol
    fwd = dopri54(f, s_b[-1], [phi_b[-1], psi_b[-1], xi_b[-1]], s_b[-1] + s_span, rtol=tol,
                  atol=min(tol, 1e-3 * EQUILIBRIUM_RADIUS),
                  dense_tol=10 * tol, stop=stop)
    if fwd.status != "equilibrium":
        raise IntegrationError(f"forward branch did not reach (1, 0): {fwd.status}")

    t = np.concatenate([s_b, fwd.t[1:]])
    phi = np.concatenate([phi_b, fwd.y[1:, 0]])
    psi = np.concatenate([psi_b, fwd.y[1:, 1]])
    xi = np.concatenate([xi_b, fwd.y[1:, 2]])
    meta.update({
        "phi0": phi0,
        "phi_min": phi_min,
        "phi_switch": phi_switch,
        "switch_index": len(s_b) - 1,
        "forward_steps": fwd.naccept,
    })
    return Orbit(TimeParam.S, t, phi, psi, xi, status="equilibrium", meta=meta)


def direction_grid(
    params: ModelParams,
    phi_range: Sequence[float],
    psi_range: Sequence[float],
    n_phi: int = 21,
    n_psi: int = 21,
) -> np.ndarray:
    """Normalized ``s``-field directions on a rectangular grid.

    Returns an ``(n_phi * n_psi, 4)`` array of ``phi, psi, dphi, dpsi``;
    zero vectors (equilibria) are left as zeros.
    """
    phis = np.linspace(*phi_range, n_phi)
    psis = np.linspace(*psi_range, n_psi)
    P, S = np.meshgrid(phis, psis, indexing="ij")
    php = P**params.p
    dphi = php * S
    dpsi = -params.c * S - php * P + params.delta * P
    norm = np.hypot(dphi, dpsi)
    safe = np.where(norm > 0, norm, 1.0)
    return np.column_stack([P.ravel(), S.ravel(), (dphi / safe).ravel(), (dpsi / safe).ravel()])
