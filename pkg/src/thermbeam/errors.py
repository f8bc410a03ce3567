"""Exception types shared across the package."""


class ThermbeamError(Exception):
    """Base class for all package-specific errors."""


class ConfigError(ThermbeamError):
    """Invalid or incomplete run configuration."""


class GeometryError(ThermbeamError):
    """Physically impossible antenna/sampling geometry (overlap, non-parallel axes)."""


class PolarizationError(GeometryError):
    """Polarization undefined: observation direction parallel to the dipole axis."""


class SingularityError(ThermbeamError):
    """Observation point coincides with a radiating element."""


class ConditioningError(ThermbeamError):
    """A matrix required by the model is numerically singular."""


class NonRadiatingError(ThermbeamError):
    """Coupling matrix admits no positive-resistance drive direction."""
