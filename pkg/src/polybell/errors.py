"""Shared exception types."""


class CapacityError(ValueError):
    """Raised when an input exceeds a documented size guard (memory or runtime)."""
