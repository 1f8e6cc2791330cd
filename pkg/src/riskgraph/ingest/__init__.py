"""Driving log ingestion.

This module reads CSV driving logs into typed records, smooths their
continuous channels with local weighted linear regression, and generates
deterministic synthetic logs from scripted scenarios.
"""

from __future__ import annotations

from riskgraph.ingest.exceptions import (
    EmptyLogError,
    IngestError,
    LogSchemaError,
    ScenarioSpecError,
    SmoothingParameterError,
)
from riskgraph.ingest.log_models import (
    CONTINUOUS_CHANNELS,
    SAMPLE_INTERVAL,
    DriverLogRecord,
    LogSchema,
    ParsedLog,
    TrackObservation,
    validate_log,
)
from riskgraph.ingest.log_parser import parse_log, serialize_csv
from riskgraph.ingest.smoothing import DEFAULT_SPAN, smooth_records, smooth_series
from riskgraph.ingest.synthetic import (
    DriverProfile,
    NoiseSpec,
    ScenarioSpec,
    SuiteSpec,
    VehicleScript,
    build_suite,
    generate_synthetic,
    lane_lines,
    scene_severity,
)

__all__ = [
    "CONTINUOUS_CHANNELS",
    "DEFAULT_SPAN",
    "SAMPLE_INTERVAL",
    "DriverLogRecord",
    "DriverProfile",
    "EmptyLogError",
    "IngestError",
    "LogSchema",
    "LogSchemaError",
    "NoiseSpec",
    "ParsedLog",
    "ScenarioSpec",
    "ScenarioSpecError",
    "SmoothingParameterError",
    "SuiteSpec",
    "TrackObservation",
    "VehicleScript",
    "build_suite",
    "generate_synthetic",
    "lane_lines",
    "parse_log",
    "scene_severity",
    "serialize_csv",
    "smooth_records",
    "smooth_series",
    "validate_log",
]
