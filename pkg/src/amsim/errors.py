"""Exception types shared across the simulation suite."""


class AmsimError(Exception):
    """Base class for all package-specific errors."""


class ConfigError(AmsimError):
    """Malformed or inconsistent configuration input."""


class SingularAttitude(AmsimError):
    """Roll or pitch reached pi/2 during integration; Euler rates undefined."""


class InfeasibleGeometry(AmsimError):
    """Barrier evaluated outside its domain (inside the safety margin)."""


class DegenerateCenter(AmsimError):
    """Deviation vector too close to the workspace center to normalize."""


class SchemaError(AmsimError):
    """Episode CSV does not match the frozen column schema."""


class EmptyLog(AmsimError):
    """Metrics requested for an episode log with no rows."""
