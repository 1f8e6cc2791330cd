"""Configuration, staged artifacts and the end-to-end run.

This module loads run configurations, reads and writes digest-stamped stage
artifacts, runs every stage for each configured driver and emits the tables
behind the run figures.
"""

from __future__ import annotations

from riskgraph.pipeline.artifacts import (
    check_stale,
    load_frames,
    load_graphs,
    load_kernel,
    load_labels,
    load_model,
    load_records,
    load_scenes,
    read_csv,
    read_json,
    read_jsonl,
    save_frames,
    save_graphs,
    save_kernel,
    save_labels,
    save_model,
    save_records,
    save_scenes,
    stored_digest,
    write_csv,
    write_csv_bytes,
    write_json,
    write_jsonl,
)
from riskgraph.pipeline.config import (
    ClassifySettings,
    DriverRun,
    IngestSettings,
    KernelSettings,
    LabelSettings,
    PipelineConfig,
    SceneSettings,
    config_from_dict,
    digest_of,
    load_config,
)
from riskgraph.pipeline.exceptions import (
    ArtifactError,
    ConfigError,
    PipelineError,
    StageError,
    StaleArtifactError,
)
from riskgraph.pipeline.figures import emit_figure_data
from riskgraph.pipeline.runner import (
    DriverResult,
    RunReport,
    run_driver,
    run_pipeline,
    run_stage,
)

__all__ = [
    "ArtifactError",
    "ClassifySettings",
    "ConfigError",
    "DriverResult",
    "DriverRun",
    "IngestSettings",
    "KernelSettings",
    "LabelSettings",
    "PipelineConfig",
    "PipelineError",
    "RunReport",
    "SceneSettings",
    "StageError",
    "StaleArtifactError",
    "check_stale",
    "config_from_dict",
    "digest_of",
    "emit_figure_data",
    "load_config",
    "load_frames",
    "load_graphs",
    "load_kernel",
    "load_labels",
    "load_model",
    "load_records",
    "load_scenes",
    "read_csv",
    "read_json",
    "read_jsonl",
    "run_driver",
    "run_pipeline",
    "run_stage",
    "save_frames",
    "save_graphs",
    "save_kernel",
    "save_labels",
    "save_model",
    "save_records",
    "save_scenes",
    "stored_digest",
    "write_csv",
    "write_csv_bytes",
    "write_json",
    "write_jsonl",
]
