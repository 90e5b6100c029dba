"""Exception hierarchy shared across the package."""


class RodwaveError(Exception):
    """Base class for all package-specific errors."""


class InvalidArgumentError(RodwaveError, ValueError):
    """A caller passed an argument outside the documented domain."""


class ConfigurationError(RodwaveError):
    """Run configuration or input data is malformed or incompatible."""

    def __init__(self, messages):
        if isinstance(messages, str):
            messages = [messages]
        self.messages = list(messages)
        super().__init__("; ".join(self.messages))


class InfeasibleError(RodwaveError):
    """The requested steering problem has no solution for generic data."""


class AssemblyError(RodwaveError):
    """Internal inconsistency while assembling or eliminating constraints."""


class SolverError(RodwaveError):
    """A linear solve failed or produced an unusable result."""


class ReconstructionError(RodwaveError):
    """Reconstructed waves or fields violate a structural invariant."""


class InvariantViolationError(RodwaveError):
    """A cross-check between two independent computations failed."""
