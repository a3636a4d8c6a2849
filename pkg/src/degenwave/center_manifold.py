"""Center-manifold reduction of the s-system at ``E_O = (0, 0)``.

At ``E_O`` (delta = 1) the linearization ``[[0, 0], [1, -c]]`` has
eigenvalues ``0`` and ``-c`` with eigenvectors ``(c, 1)`` and ``(0, 1)``.
In the eigenbasis ``(phi~, psi~) = T^-1 (phi, psi)`` the manifold is the graph
``psi~ = -c**(p-2) (c^2+1) phi~**(p+1) + ...``; pulled back this is

    psi = h(phi) = phi/c - (c^2+1)/c^3 phi**(p+1)

and the flow restricted to it is ``phi' = phi**p h(phi)``.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .errors import PreconditionError
from .model import ModelParams, PhaseState

__all__ = [
    "CenterManifoldModel",
    "CenterManifoldValidityWarning",
    "make_model",
    "to_eigenbasis",
    "from_eigenbasis",
    "vector_field_tilde",
    "tilde_graph",
    "cm_graph",
    "reduced_flow",
    "cm_residual",
    "validity_radius",
]


class CenterManifoldValidityWarning(UserWarning):
    """phi is outside the region where the truncated graph is meaningful."""


@dataclass(frozen=True)
class CenterManifoldModel:
    params: ModelParams
    graph_coefficient: float  # of phi**(p+1) in h(phi)
    flow_coefficients: tuple[float, float]  # of phi**(p+1), phi**(2p+1) in dphi/ds
    tilde_coefficient: float  # of phi~**(p+1) in the eigenbasis graph


def make_model(params: ModelParams) -> CenterManifoldModel:
    c, p = params.c, params.p
    k = (c * c + 1.0) / c**3
    return CenterManifoldModel(
        params=params,
        graph_coefficient=-k,
        flow_coefficients=(1.0 / c, -k),
        tilde_coefficient=-(c ** (p - 2)) * (c * c + 1.0),
    )


def validity_radius(params: ModelParams) -> float:
    """Half the distance to the spurious zero of the truncated reduced flow."""
    return 0.5 * params.plateau_phi


def _require_delta(params: ModelParams):
    if params.delta != 1:
        raise PreconditionError("the eigenbasis at E_O is defined for delta = 1")


def to_eigenbasis(params: ModelParams, state) -> PhaseState:
    """``T^-1 (phi, psi)`` with ``T = [[c, 0], [1, 1]]``."""
    _require_delta(params)
    phi, psi = state
    c = params.c
    return PhaseState(phi / c, psi - phi / c)


def from_eigenbasis(params: ModelParams, state) -> PhaseState:
    _require_delta(params)
    pt, st = state
    c = params.c
    return PhaseState(c * pt, pt + st)


def vector_field_tilde(params: ModelParams, state) -> tuple[float, float]:
    """The s-system written in eigenbasis coordinates."""
    _require_delta(params)
    pt, st = state
    p, c = params.p, params.c
    a = c ** (p - 1) * pt**p
    dphi = a * pt + a * st
    dpsi = -c * st - a * pt - a * st - c ** (p + 1) * pt ** (p + 1)
    return dphi, dpsi


def tilde_graph(params: ModelParams, phi_tilde):
    m = make_model(params)
    return m.tilde_coefficient * np.asarray(phi_tilde, dtype=float) ** (params.p + 1)


def cm_graph(params: ModelParams, phi, *, warn: bool = True):
    """``psi`` on the truncated center manifold over ``phi``."""
    phi_arr = np.asarray(phi, dtype=float)
    if warn and np.any(np.abs(phi_arr) > validity_radius(params)):
        warnings.warn(
            f"|phi| exceeds the validity radius {validity_radius(params):.4g} "
            "of the truncated center manifold",
            CenterManifoldValidityWarning,
            stacklevel=2,
        )
    c, p = params.c, params.p
    out = phi_arr / c - (c * c + 1.0) / c**3 * phi_arr ** (p + 1)
    return float(out) if out.ndim == 0 else out


def reduced_flow(params: ModelParams, phi):
    """``dphi/ds`` restricted to the truncated center manifold."""
    phi_arr = np.asarray(phi, dtype=float)
    c, p = params.c, params.p
    out = phi_arr ** (p + 1) / c - (c * c + 1.0) / c**3 * phi_arr ** (2 * p + 1)
    return float(out) if out.ndim == 0 else out


def cm_residual(params: ModelParams, orbit) -> np.ndarray:
    """Distance ``|psi - h(phi)|`` of each sample from the truncated graph.

    Returns an ``(n, 2)`` array of ``(phi, residual)`` for samples with
    ``phi > 0``.
    """
    phi = np.asarray(orbit.phi, dtype=float)
    psi = np.asarray(orbit.psi, dtype=float)
    if phi.size == 0:
        raise PreconditionError("empty orbit")
    keep = phi > 0
    phi, psi = phi[keep], psi[keep]
    res = np.abs(psi - cm_graph(params, phi, warn=False))
    return np.column_stack([phi, res])
