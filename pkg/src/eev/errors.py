"""Exception types shared across the solver."""


class ConfigurationError(ValueError):
    """Invalid configuration or mismatched shapes/grids."""


class ContractViolationError(ValueError):
    """An operation was called with data violating its preconditions."""


class BlowUpError(RuntimeError):
    """NaN/Inf detected during time integration."""

    def __init__(self, t, member, max_value):
        self.t = t
        self.member = member
        self.max_value = max_value
        super().__init__(
            f"solution blew up at t={t:.6g} (member {member}, max |coeff| = {max_value:.3e})"
        )


class SchemaError(ValueError):
    """A serialized file does not carry the expected schema id."""
