"""Custom exceptions for the ingest module.

This module defines the exception classes raised while parsing, smoothing and
synthesising driving logs.
"""

from __future__ import annotations

from riskgraph.exceptions import RiskGraphError


class IngestError(RiskGraphError):
    """Base exception for ingest-related errors."""

    exit_code = 3


class LogSchemaError(IngestError):
    """Raised when a CSV log or its column map is missing required fields."""

    pass


class EmptyLogError(IngestError):
    """Raised when a log yields no valid records."""

    pass


class SmoothingParameterError(IngestError):
    """Raised when a smoothing span is even or outside the series length."""

    pass


class ScenarioSpecError(IngestError):
    """Raised when a synthetic scenario cannot be realised.

    This covers vehicles placed outside the three lanes, overlapping spawns and
    malformed driver profiles.
    """

    pass
