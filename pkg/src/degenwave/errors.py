"""Exception hierarchy shared by all submodules."""


class DegenWaveError(Exception):
    """Base class for every error raised by this package."""


class DomainError(DegenWaveError, ValueError):
    """Argument lies outside the real domain of a function or branch."""


class PreconditionError(DegenWaveError, ValueError):
    """Caller-supplied parameters violate a documented precondition."""


class SingularityError(DegenWaveError, ArithmeticError):
    """Evaluation hit a singular set (e.g. the line phi = 0 of the xi-field)."""


class IntegrationError(DegenWaveError, RuntimeError):
    """Step-size underflow, non-finite state or other solver failure."""


class QuadratureError(DegenWaveError, RuntimeError):
    """Adaptive quadrature did not reach the requested accuracy."""


class BlowUpError(DegenWaveError, RuntimeError):
    """PDE solution exceeded the blow-up guard."""

    def __init__(self, message, time=None, snapshots=None):
        super().__init__(message)
        self.time = time
        self.snapshots = snapshots or []
