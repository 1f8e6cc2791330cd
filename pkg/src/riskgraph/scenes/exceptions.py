"""Custom exceptions for the scenes module."""

from __future__ import annotations

from riskgraph.exceptions import RiskGraphError


class SceneError(RiskGraphError):
    """Base exception for scene-related errors."""

    exit_code = 4


class TrajectoryParameterError(SceneError):
    """Raised when velocity sequences cannot be integrated."""

    pass


class ExtractionError(SceneError):
    """Raised when a scene lacks what a feature or invariant needs.

    This covers a lane-change track that is not visible at the anchor frame
    and hand-edited scenes that break the extraction criteria.
    """

    pass
