"""Exception types shared across the package."""


class BulkcastError(Exception):
    """Base class for all package-specific errors."""


class TopologyError(BulkcastError):
    """Malformed or inconsistent topology input."""


class ConfigError(BulkcastError):
    """Invalid simulation or workload configuration."""


class SimulationError(BulkcastError):
    """Internal consistency violation detected during a run."""


class InstanceTooLargeError(BulkcastError):
    """Exact tree search refused an instance above its size guard."""
