"""Boundary-entropy certification for Davies semigroups with rank-deficient stationary states."""

from .errors import BranchError, DomainError, NumericalError, SamplerError, ValidationError

__version__ = "0.1.0"

__all__ = ["BranchError", "DomainError", "NumericalError", "SamplerError", "ValidationError"]
