"""Custom exceptions for the pipeline module.

This module defines the exception classes raised while loading run
configurations, reading and writing stage artifacts, and running stages.
"""

from __future__ import annotations

from riskgraph.exceptions import RiskGraphError


class PipelineError(RiskGraphError):
    """Base exception for pipeline errors."""

    exit_code = 9


class ConfigError(PipelineError):
    """Raised when a configuration file is missing, malformed or inconsistent.

    The message names the offending field with its dotted path, for example
    ``drivers[1].synth_seed``.
    """

    exit_code = 2


class ArtifactError(PipelineError):
    """Raised when a stage artifact is missing or cannot be decoded."""

    pass


class StaleArtifactError(PipelineError):
    """Raised when an artifact was written under a different configuration.

    Attributes:
        path: Artifact path
        stored: Digest recorded in the artifact
        expected: Digest of the current configuration
    """

    def __init__(self, message: str, path: str, stored: str, expected: str) -> None:
        super().__init__(message)
        self.path = path
        self.stored = stored
        self.expected = expected


class StageError(PipelineError):
    """Raised when a pipeline stage fails.

    Attributes:
        stage: Name of the failing stage
        cause: The underlying error
    """

    def __init__(self, stage: str, cause: Exception) -> None:
        super().__init__(f"Stage '{stage}' failed: {cause}")
        self.stage = stage
        self.cause = cause
        self.exit_code = getattr(cause, "exit_code", PipelineError.exit_code)
