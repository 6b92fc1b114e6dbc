"""Exception types shared across the package."""


class ValidationError(ValueError):
    """Input violates a documented invariant (sign, range, ordering)."""


class DomainError(ValueError):
    """Input lies outside the mathematical domain of a conversion."""


class ConfigError(ValidationError):
    """Configuration failure tied to a dotted field path."""

    def __init__(self, field: str, message: str):
        self.field = field
        super().__init__(f"{field}: {message}")


class FitError(RuntimeError):
    """A fit could not be attempted (no feature, degenerate data)."""
