"""Shared exception types."""


class BudgetError(RuntimeError):
    """An enumeration or state-space budget would be exceeded."""
