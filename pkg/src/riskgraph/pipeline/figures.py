"""CSV tables behind the run figures.

Plotting happens elsewhere; this module only turns the artifacts of a driver
run into flat tables: the per-k RSS and silhouette curves, per-level response
histograms, confusion-matrix cells and accuracy bars.
"""

from __future__ import annotations

import logging
from pathlib import Path

import pandas as pd

from riskgraph.classify.svm_models import EvaluationReport
from riskgraph.labels.risk import cluster_histograms
from riskgraph.pipeline.artifacts import (
    load_labels,
    load_scenes,
    read_json,
    write_csv,
)
from riskgraph.pipeline.exceptions import StaleArtifactError

logger = logging.getLogger(__name__)

FIGURES_DIR = "figures"
LABELS_FILE = "labels.json"
SCENES_FILE = "scenes.jsonl"
SELECTION_FILE = "k_selection.json"
REPORT_FILE = "report.json"


def _same_digest(path: Path, stored: str, expected: str) -> None:
    if stored != expected:
        raise StaleArtifactError(
            f"{path} belongs to configuration '{stored}' but the driver report "
            f"belongs to '{expected}'.\n"
            f"Suggestion: rerun the pipeline with --force",
            str(path),
            stored,
            expected,
        )


def selection_frame(selection: dict[str, list[dict[str, float]]]) -> pd.DataFrame:
    """One row per (variant, k) with its RSS and silhouette coefficient."""
    rows = [
        {"variant": variant, **row}
        for variant, table in selection.items()
        for row in table
    ]
    return pd.DataFrame(rows, columns=["variant", "k", "rss", "silhouette"])


def accuracy_frame(reports: list[EvaluationReport]) -> pd.DataFrame:
    return pd.DataFrame(
        [
            {
                "classifier": r.name,
                "overall_accuracy": r.confusion.accuracy,
                "mean_fold_accuracy": r.mean_accuracy,
            }
            for r in reports
        ],
        columns=["classifier", "overall_accuracy", "mean_fold_accuracy"],
    )


def emit_figure_data(
    driver_dir: Path, *, bins: int = 20, force: bool = False
) -> list[Path]:
    """Write the figure tables of one driver run.

    Args:
        driver_dir: Folder holding the driver's artifacts
        bins: Histogram bins of the response accelerations
        force: Overwrite tables written under another configuration

    Returns:
        Paths of the CSV files written, in a fixed order

    Raises:
        ArtifactError: If an artifact of the run is missing
        StaleArtifactError: If the artifacts come from different configurations
    """
    report, digest = read_json(driver_dir / REPORT_FILE)
    labels, labels_digest = load_labels(driver_dir / LABELS_FILE)
    _same_digest(driver_dir / LABELS_FILE, labels_digest, digest)
    scenes, scenes_digest = load_scenes(driver_dir / SCENES_FILE)
    _same_digest(driver_dir / SCENES_FILE, scenes_digest, digest)
    selection, selection_digest = read_json(driver_dir / SELECTION_FILE)
    _same_digest(driver_dir / SELECTION_FILE, selection_digest, digest)

    out = driver_dir / FIGURES_DIR
    written: list[Path] = []

    def emit(name: str, frame: pd.DataFrame) -> None:
        path = out / name
        write_csv(path, frame, digest, force=force)
        written.append(path)

    emit("k_selection.csv", selection_frame(selection["variants"]))
    emit(
        "histograms.csv",
        cluster_histograms(labels, [s.response_ax for s in scenes], bins),
    )
    evaluations = [EvaluationReport.from_dict(e) for e in report["evaluations"]]
    for evaluation in evaluations:
        emit(f"confusion_{evaluation.name}.csv", evaluation.confusion.cells())
    emit("accuracy.csv", accuracy_frame(evaluations))
    logger.info("Wrote %d figure tables to %s", len(written), out)
    return written
