"""Parameter and state containers used across the package."""
from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import PreconditionError

__all__ = ["ModelParams", "PhaseState"]


@dataclass(frozen=True)
class ModelParams:
    """Exponent ``p``, wave speed ``c`` and kinetic switch ``delta``.

    The PDE is ``u_t = u**p * (u_xx + u) - delta * u``; traveling waves
    ``u = phi(x - c t)`` are studied for even ``p`` and ``c > 0``.
    """

    p: int
    c: float
    delta: int = 1

    def __post_init__(self):
        if isinstance(self.p, bool) or int(self.p) != self.p or self.p < 2 or self.p % 2:
            raise PreconditionError(f"p must be an even integer >= 2, got {self.p!r}")
        if not (math.isfinite(self.c) and self.c > 0):
            raise PreconditionError(f"c must be a positive finite number, got {self.c!r}")
        if self.delta not in (0, 1):
            raise PreconditionError(f"delta must be 0 or 1, got {self.delta!r}")
        object.__setattr__(self, "p", int(self.p))
        object.__setattr__(self, "c", float(self.c))
        object.__setattr__(self, "delta", int(self.delta))

    @property
    def discriminant(self) -> float:
        """``c**2 - 4p``; its sign decides spiral versus node at (+-1, 0)."""
        return self.c**2 - 4 * self.p

    @property
    def plateau_phi(self) -> float:
        """Zero of the reduced flow, ``(c^2 / (c^2 + 1)) ** (1/p)``."""
        c2 = self.c**2
        return (c2 / (c2 + 1.0)) ** (1.0 / self.p)

    @property
    def anchor_bound(self) -> float:
        """Upper bound ``(c^2 / (c^2 + 2)) ** (1/p)`` on admissible anchors phi0."""
        c2 = self.c**2
        return (c2 / (c2 + 2.0)) ** (1.0 / self.p)

    def as_dict(self) -> dict:
        return {"p": self.p, "c": self.c, "delta": self.delta}


@dataclass(frozen=True)
class PhaseState:
    phi: float
    psi: float

    def __post_init__(self):
        if not (math.isfinite(self.phi) and math.isfinite(self.psi)):
            raise ValueError(f"non-finite phase state ({self.phi}, {self.psi})")

    def __iter__(self):
        yield self.phi
        yield self.psi

    def as_tuple(self) -> tuple[float, float]:
        return (self.phi, self.psi)
