"""Custom exceptions for the kernels module."""

from __future__ import annotations

from riskgraph.exceptions import RiskGraphError


class KernelError(RiskGraphError):
    """Base exception for kernel errors."""

    exit_code = 6


class KernelConfigError(KernelError):
    """Raised when kernel parameters are out of range."""

    pass


class KernelNotPSDError(KernelError):
    """Raised when a Gram matrix is not positive semi-definite within tolerance.

    Attributes:
        min_eigenvalue: Most negative eigenvalue found
        max_eigenvalue: Largest eigenvalue found
    """

    def __init__(self, message: str, min_eigenvalue: float, max_eigenvalue: float):
        super().__init__(message)
        self.min_eigenvalue = min_eigenvalue
        self.max_eigenvalue = max_eigenvalue
