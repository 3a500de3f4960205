"""Exception types shared across the package."""


class CavityGateError(Exception):
    """Base class for package-specific failures."""


class ConfigError(CavityGateError):
    """Invalid run configuration (bad key, bad value, violated precondition)."""


class GridResolutionError(CavityGateError, ValueError):
    """Mode grid cannot resolve the requested bandwidth or span."""


class PulsePlacementError(CavityGateError, ValueError):
    """Wavepacket placement violates the locality preconditions."""


class ZeroSymmetricLeakError(CavityGateError, ValueError):
    """Symmetric-leak coefficient alpha = 0 makes the photon-number window undefined."""


class StepSizeError(CavityGateError, RuntimeError):
    """Integrator step rejected: norm-leak residual exceeded tolerance."""


class NonFiniteStateError(CavityGateError, RuntimeError):
    """Integration aborted on NaN/Inf amplitudes."""


class NotConvergedError(CavityGateError, RuntimeError):
    """Cavity/emitter excitation had not decayed at the end of the run."""


class UndefinedReflectionError(CavityGateError, ValueError):
    """Reflection ratio requested for a pulse with no amplitude in that channel."""


class MemoryBudgetError(CavityGateError, RuntimeError):
    """Requested ensemble exceeds the configured memory budget."""
