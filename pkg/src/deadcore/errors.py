"""Exception types shared across the package."""


class DeadCoreError(Exception):
    """Base class for all package errors."""


class DomainError(DeadCoreError, ValueError):
    """An argument lies outside the domain of the operation."""


class ResourceError(DeadCoreError):
    """A requested computation exceeds the configured size budget."""


class NonConvergenceError(DeadCoreError):
    """An iterative procedure failed to reach its stopping criterion."""


class GeometryError(DeadCoreError, ValueError):
    """A test ball or radius is incompatible with the domain."""


class PreconditionError(DeadCoreError, ValueError):
    """The inputs do not satisfy the hypotheses the check relies on."""


class ConfigError(DeadCoreError, ValueError):
    """Malformed or out-of-range configuration."""
