class GdprAuditError(Exception):
    """Base class for all errors raised by this package."""


class DataError(GdprAuditError, ValueError):
    """Input data is malformed, inconsistent or insufficient."""
