"""Custom exceptions for the classify module.

This module defines the exception classes raised while training support vector
machines on precomputed kernels and evaluating them by cross-validation.
"""

from __future__ import annotations

from riskgraph.exceptions import RiskGraphError


class ClassifyError(RiskGraphError):
    """Base exception for classification errors."""

    exit_code = 8


class TrainingError(ClassifyError):
    """Raised when a model cannot be trained.

    This covers labels with a single class, kernel blocks whose shape does not
    match the labels, and solutions that break dual feasibility.
    """

    pass


class PredictionError(ClassifyError):
    """Raised when a kernel row does not match the training set."""

    pass


class FoldError(ClassifyError):
    """Raised when a class has fewer members than cross-validation folds."""

    pass
