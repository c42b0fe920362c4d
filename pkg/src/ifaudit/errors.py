"""Exception hierarchy. The CLI maps each class to its own exit code."""


class AuditError(Exception):
    """Base class for audit failures."""


class ValidationError(AuditError, ValueError):
    """Input data, schema or configuration is invalid."""


class NoScorableGroupsError(AuditError, ValueError):
    """Fewer than two groups survive exclusion, so no pairwise score exists."""


class ConfigMismatchError(AuditError):
    """Two evaluations were produced under incompatible configurations."""
