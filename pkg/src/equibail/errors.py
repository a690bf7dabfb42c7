"""Error types shared across the library, mapped to CLI exit codes."""

from __future__ import annotations


class EquibailError(Exception):
    """Base class for all library errors."""


class ParameterError(EquibailError):
    """Invalid model parameters or arguments (CLI exit 3)."""

    def __init__(self, message, violations=None):
        super().__init__(message)
        # full list of violations, not just the first one
        self.violations = list(violations) if violations is not None else [message]


class StabilityError(EquibailError):
    """Spillover matrix has spectral radius >= 1 (CLI exit 4)."""

    def __init__(self, message, rho=None):
        super().__init__(message)
        self.rho = rho


class NonInteriorError(EquibailError):
    """An infusion support (or required cutoff) is not interior to its block (CLI exit 5)."""

    def __init__(self, message, block=None):
        super().__init__(message)
        self.block = block


class NumericError(EquibailError):
    """An iterative routine failed to converge (CLI exit 6)."""

    def __init__(self, message, iterations=None, residual=None):
        super().__init__(message)
        self.iterations = iterations
        self.residual = residual
