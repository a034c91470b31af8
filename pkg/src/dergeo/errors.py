"""Shared exception types."""


class InvariantViolation(ValueError):
    """A structural invariant failed at construction or validation.

    Carries the invariant's name so JSON loaders and the CLI can report
    which rule was violated.
    """

    def __init__(self, invariant: str, detail: str = ""):
        self.invariant = invariant
        self.detail = detail
        msg = invariant if not detail else f"{invariant}: {detail}"
        super().__init__(msg)


class BoundExceeded(RuntimeError):
    """An enumeration or size guard was hit."""
