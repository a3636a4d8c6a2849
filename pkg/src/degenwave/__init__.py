"""Traveling waves of the degenerate equation ``u_t = u^p (u_xx + u) - delta u``.

Phase-plane analysis, center-manifold reduction, closed-form asymptotics of
the wave tail, a method-of-lines simulator and validation pipelines.
"""
from .errors import (
    BlowUpError,
    DegenWaveError,
    DomainError,
    IntegrationError,
    PreconditionError,
    QuadratureError,
    SingularityError,
)
from .model import ModelParams, PhaseState
from .special_functions import WBranch, lambert_w

__all__ = [
    "ModelParams",
    "PhaseState",
    "WBranch",
    "lambert_w",
    "DegenWaveError",
    "DomainError",
    "PreconditionError",
    "SingularityError",
    "IntegrationError",
    "QuadratureError",
    "BlowUpError",
]

__version__ = "0.1.0"
