"""Exception types shared across the package."""


class ValidationError(ValueError):
    """Raised when an input value violates a documented precondition."""


class ContractError(RuntimeError):
    """Raised when an operation is invoked on a state it is not defined for,
    e.g. a polarization-only operation on a state with unmeasured probes."""
