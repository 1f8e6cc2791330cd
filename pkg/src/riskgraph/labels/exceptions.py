"""Custom exceptions for the labels module.

This module defines the exception classes raised while clustering driver
responses and turning clusters into risk levels.
"""

from __future__ import annotations

from riskgraph.exceptions import RiskGraphError


class LabelError(RiskGraphError):
    """Base exception for labelling errors."""

    exit_code = 7


class ClusteringError(LabelError):
    """Raised when clustering parameters do not fit the data.

    Examples are k larger than the number of points, fewer than two points
    for a projection, or non-finite features.
    """

    pass


class SilhouetteUndefinedError(LabelError):
    """Raised when silhouette values are requested for a single cluster."""

    pass


class DegenerateLabelError(LabelError):
    """Raised when no scene has a braking response to cluster."""

    pass
