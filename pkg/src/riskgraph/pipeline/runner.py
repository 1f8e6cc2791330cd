"""End-to-end pipeline over every configured driver.

For each driver the stages run in order and persist their output under
``output_dir/<driver_id>``: log, smoothed records, scenes, risk labels, scene
graphs, both graph Gram matrices, cross-validated evaluations, models trained
on all scenes and the figure tables. The run report puts the shortest-path,
neighbourhood-hash and lane-change-feature accuracies of every driver side by
side.
"""

from __future__ import annotations

import logging
from collections.abc import Callable, Sequence
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Any, TypeVar

import pandas as pd

from riskgraph.classify.evaluation import (
    cross_validate_gram,
    learning_curve,
    vrm_classifier_path,
)
from riskgraph.classify.svm import train_svm
from riskgraph.classify.svm_models import EvaluationReport
from riskgraph.exceptions import RiskGraphError
from riskgraph.graphs.builder import build_scene_graph
from riskgraph.graphs.graph_models import SceneGraph
from riskgraph.ingest.log_models import DriverLogRecord
from riskgraph.ingest.log_parser import parse_log, serialize_csv
from riskgraph.ingest.smoothing import smooth_records
from riskgraph.ingest.synthetic import build_suite, generate_synthetic
from riskgraph.kernels.gram import gram_matrix
from riskgraph.kernels.kernel_models import KernelConfig, KernelMatrix, KernelName
from riskgraph.labels.risk import compare_feature_clusterings, label_scenes
from riskgraph.pipeline import artifacts
from riskgraph.pipeline.config import DriverRun, PipelineConfig
from riskgraph.pipeline.exceptions import StageError
from riskgraph.pipeline.figures import (
    FIGURES_DIR,
    LABELS_FILE,
    REPORT_FILE,
    SCENES_FILE,
    SELECTION_FILE,
    emit_figure_data,
)
from riskgraph.scenes.birds_eye import road_map, to_birds_eye
from riskgraph.scenes.extraction import extract_scenes, vrm_matrix
from riskgraph.scenes.scene_models import Scene

logger = logging.getLogger(__name__)

T = TypeVar("T")

CLASSIFIERS = ("spgk", "nhgk", "linear")


def run_stage(name: str, action: Callable[[], T]) -> T:
    """Run one stage, wrapping any riskgraph error with the stage name.

    Raises:
        StageError: If the stage raises a RiskGraphError
    """
    logger.info("Stage %s", name)
    try:
        return action()
    except StageError:
        raise
    except RiskGraphError as e:
        raise StageError(name, e) from e


@dataclass(frozen=True)
class DriverResult:
    """Outcome of one driver's run.

    Attributes:
        driver_id: Driver label
        scene_count: Extracted scenes
        k: Braking clusters
        level_counts: Scenes per risk level
        evaluations: Cross-validated evaluation per classifier
        degenerate_graphs: Graphs with an all-zero shortest-path kernel row
    """

    driver_id: str
    scene_count: int
    k: int
    level_counts: dict[int, int]
    evaluations: tuple[EvaluationReport, ...]
    degenerate_graphs: int = 0

    def accuracy(self, name: str) -> float:
        for evaluation in self.evaluations:
            if evaluation.name == name:
                return evaluation.confusion.accuracy
        raise KeyError(name)

    def to_dict(self) -> dict[str, Any]:
        return {
            "driver_id": self.driver_id,
            "scene_count": self.scene_count,
            "k": self.k,
            "level_counts": {
                str(level): count for level, count in sorted(self.level_counts.items())
            },
            "degenerate_graphs": self.degenerate_graphs,
            "accuracy": {e.name: e.confusion.accuracy for e in self.evaluations},
            "evaluations": [e.to_dict() for e in self.evaluations],
        }


@dataclass(frozen=True)
class RunReport:
    config_digest: str
    drivers: tuple[DriverResult, ...]

    def comparison(self) -> pd.DataFrame:
        """Accuracy of every classifier per driver."""
        return pd.DataFrame(
            [
                {"driver": d.driver_id, **{c: d.accuracy(c) for c in CLASSIFIERS}}
                for d in self.drivers
            ],
            columns=["driver", *CLASSIFIERS],
        )

    def to_dict(self) -> dict[str, Any]:
        return {
            "drivers": [d.to_dict() for d in self.drivers],
            "comparison": self.comparison().to_dict(orient="records"),
        }


def load_driver_log(
    config: PipelineConfig, run: DriverRun, driver_dir: Path, digest: str, force: bool
) -> list[DriverLogRecord]:
    """Raw records of a driver: parsed from its log or freshly simulated.

    A simulated log is also written to ``log.csv`` in the driver folder.
    """
    if run.log is not None:
        if not run.log.is_file():
            raise StageError(
                "ingest", FileNotFoundError(f"Driver log not found: {run.log}")
            )
        return list(parse_log(run.log.read_bytes()).records)
    assert run.synth_seed is not None
    spec = build_suite(replace(config.suite, driver=run.profile), run.synth_seed)
    records = generate_synthetic(spec, run.synth_seed)
    artifacts.write_csv_bytes(
        driver_dir / "log.csv", serialize_csv(records), digest, force=force
    )
    return records


def graph_kernels(
    config: PipelineConfig, graphs: Sequence[SceneGraph]
) -> dict[str, KernelMatrix]:
    """Shortest-path and neighbourhood-hash Gram matrices of the scene graphs."""
    settings = config.kernels
    return {
        "spgk": gram_matrix(
            graphs, KernelConfig(name=KernelName.SPGK, normalize=settings.normalize)
        ),
        "nhgk": gram_matrix(
            graphs,
            KernelConfig(
                name=KernelName.NHGK,
                h=settings.h,
                bits=settings.bits,
                seed=settings.seed,
            ),
        ),
    }


def run_driver(
    config: PipelineConfig, run: DriverRun, digest: str, *, force: bool = False
) -> DriverResult:
    """Run every stage for one driver and persist the intermediates."""
    driver_dir = config.output_dir / run.driver_id
    driver_dir.mkdir(parents=True, exist_ok=True)
    logger.info("Driver %s -> %s", run.driver_id, driver_dir)

    raw = run_stage(
        "ingest", lambda: load_driver_log(config, run, driver_dir, digest, force)
    )
    records = run_stage(
        "smooth",
        lambda: smooth_records(raw, config.ingest.span, config.ingest.channels),
    )
    artifacts.save_records(driver_dir / "records.jsonl", records, digest, force=force)

    def extract() -> list[Scene]:
        frames = [to_birds_eye(r) for r in records]
        settings = config.scenes
        return extract_scenes(
            frames,
            settings.window,
            settings.straight_tol,
            persistence=settings.persistence,
            horizon=settings.horizon,
            source=run.driver_id,
        )

    scenes = run_stage("extract", extract)
    artifacts.save_scenes(driver_dir / SCENES_FILE, scenes, digest, force=force)
    logger.info("Driver %s: %d scenes", run.driver_id, len(scenes))

    label_settings = config.labels
    outcome = run_stage(
        "label",
        lambda: label_scenes(
            scenes,
            label_settings.features,
            label_settings.k,
            label_settings.seed,
            k_range=label_settings.candidates,
            use_kpca=label_settings.use_kpca,
            components=label_settings.components,
            gamma=label_settings.gamma,
        ),
    )
    labels = outcome.labels
    artifacts.save_labels(driver_dir / LABELS_FILE, labels, digest, force=force)
    variants = run_stage(
        "label",
        lambda: compare_feature_clusterings(
            scenes,
            label_settings.candidates,
            label_settings.seed,
            components=label_settings.components,
        ),
    )
    artifacts.write_json(
        driver_dir / SELECTION_FILE,
        {
            "chosen_k": labels.k,
            "chosen": outcome.selection.to_rows() if outcome.selection else [],
            "variants": {name: s.to_rows() for name, s in variants.items()},
        },
        digest,
        force=force,
    )

    graphs = run_stage(
        "graphs", lambda: [build_scene_graph(s, config.grid) for s in scenes]
    )
    artifacts.save_graphs(driver_dir / "graphs.jsonl", graphs, digest, force=force)

    kernels = run_stage("gram", lambda: graph_kernels(config, graphs))
    for name, matrix in kernels.items():
        artifacts.save_kernel(
            driver_dir / f"gram_{name}.bin", matrix, digest, force=force
        )

    settings = config.classify

    def evaluate() -> list[EvaluationReport]:
        reports = [
            cross_validate_gram(
                kernels[name],
                labels,
                settings.C,
                settings.folds,
                settings.seed,
                tol=settings.tol,
            )
            for name in ("spgk", "nhgk")
        ]
        reports.append(
            vrm_classifier_path(
                vrm_matrix(scenes),
                labels,
                settings.C,
                settings.folds,
                settings.seed,
                refs=labels.scene_refs,
            )
        )
        for name, matrix in kernels.items():
            model = train_svm(matrix, labels, settings.C, tol=settings.tol)
            artifacts.save_model(
                driver_dir / f"model_{name}.json", model, digest, force=force
            )
        return reports

    evaluations = run_stage("train", evaluate)
    curve = run_stage(
        "train",
        lambda: learning_curve(
            kernels["spgk"],
            labels,
            settings.fractions,
            settings.C,
            settings.folds,
            settings.seed,
        ),
    )
    result = DriverResult(
        driver_id=run.driver_id,
        scene_count=len(scenes),
        k=labels.k,
        level_counts=labels.counts(),
        evaluations=tuple(evaluations),
        degenerate_graphs=kernels["spgk"].degenerate,
    )
    artifacts.write_json(
        driver_dir / REPORT_FILE, result.to_dict(), digest, force=force
    )

    figures = driver_dir / FIGURES_DIR
    artifacts.write_csv(figures / "learning_curve.csv", curve, digest, force=force)
    artifacts.write_csv(figures / "road_map.csv", road_map(raw), digest, force=force)
    run_stage("report", lambda: emit_figure_data(driver_dir, force=force))
    return result


def run_pipeline(config: PipelineConfig, *, force: bool = False) -> RunReport:
    """Run all drivers and write the side-by-side report.

    Args:
        config: Validated run configuration
        force: Overwrite artifacts written under another configuration

    Returns:
        RunReport; also written to ``output_dir/report.json`` with the accuracy
        comparison in ``output_dir/accuracy.csv``

    Raises:
        StageError: If a stage fails; the message names the stage
        StaleArtifactError: If an existing artifact has another config digest
    """
    digest = config.digest()
    logger.info("Pipeline run with configuration digest %s", digest)
    results = tuple(
        run_driver(config, run, digest, force=force) for run in config.drivers
    )
    report = RunReport(config_digest=digest, drivers=results)
    artifacts.write_json(
        config.output_dir / REPORT_FILE, report.to_dict(), digest, force=force
    )
    artifacts.write_csv(
        config.output_dir / "accuracy.csv", report.comparison(), digest, force=force
    )
    for driver in results:
        logger.info(
            "Driver %s: spgk %.3f, nhgk %.3f, linear %.3f",
            driver.driver_id,
            driver.accuracy("spgk"),
            driver.accuracy("nhgk"),
            driver.accuracy("linear"),
        )
    return report
