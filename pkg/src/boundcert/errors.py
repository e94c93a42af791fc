"""Exception types shared across the package."""


class ValidationError(ValueError):
    """Input violates a structural precondition (shape, Hermiticity, rank...)."""


class DomainError(ValueError):
    """A function was evaluated outside the set where it is defined."""


class BranchError(DomainError):
    """Target lies outside the local inverse branch of the modulus."""


class NumericalError(ArithmeticError):
    """A numerical routine failed to converge or produced an unstable result."""

    def __init__(self, message, **diagnostics):
        super().__init__(message)
        self.diagnostics = diagnostics


class SamplerError(RuntimeError):
    """Rejection sampler exhausted its attempt budget."""

    def __init__(self, message, **diagnostics):
        super().__init__(message)
        self.diagnostics = diagnostics
