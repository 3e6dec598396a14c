"""Exception types shared across the simulation package."""


class FluxsimError(Exception):
    """Base class for all package errors."""


class InvalidDimensionError(FluxsimError):
    """A basis or truncation dimension is too small to be meaningful."""


class NumericalFailureError(FluxsimError):
    """An eigensolver or integrator failed; carries the offending inputs."""

    def __init__(self, message, **inputs):
        super().__init__(message)
        self.inputs = inputs


class IndexBoundError(FluxsimError):
    """A level index lies outside the trusted (converged) range."""


class ResonanceRegionError(FluxsimError):
    """Dressed-state labeling broke down; the dispersive model is invalid here."""

    def __init__(self, message, flux=None, worst_quality=None):
        super().__init__(message)
        self.flux = flux
        self.worst_quality = worst_quality


class BracketingError(FluxsimError):
    """A search window does not bracket an interior minimum."""


class DomainError(FluxsimError):
    """An evaluation point lies outside a tabulated profile's domain."""


class StepSizeError(FluxsimError):
    """Fixed-step propagation exceeded its unitarity budget."""

    def __init__(self, message, defect=None, dt=None):
        super().__init__(message)
        self.defect = defect
        self.dt = dt


class OptimizerConsistencyError(FluxsimError):
    """A refinement stage returned a worse point than its own starting grid."""


class ConfigError(FluxsimError):
    """Configuration file is missing, malformed, or violates an invariant."""

    def __init__(self, category, message):
        super().__init__(message)
        self.category = category
