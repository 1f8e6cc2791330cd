"""Main CLI interface for riskgraph.

This module provides the command-line interface for the riskgraph tool. It
uses Typer to expose every pipeline stage as a subcommand that reads and
writes files, plus a ``run`` command that executes all stages from one
configuration file.

Data go to files only; progress and errors go to standard error. A failing
command exits with the exit code of the error it hit.
"""

from __future__ import annotations

import json
import logging
import sys
from collections.abc import Iterator
from contextlib import contextmanager
from pathlib import Path
from typing import Annotated, Any

import pandas as pd
import typer

from riskgraph import __version__
from riskgraph.classify.evaluation import cross_validate_gram
from riskgraph.classify.svm import train_svm
from riskgraph.exceptions import RiskGraphError
from riskgraph.graphs.builder import build_frame_graphs, build_scene_graph
from riskgraph.ingest.log_models import LogSchema
from riskgraph.ingest.log_parser import parse_log, serialize_csv
from riskgraph.ingest.smoothing import DEFAULT_SPAN, smooth_records
from riskgraph.ingest.synthetic import (
    ScenarioSpec,
    SuiteSpec,
    build_suite,
    generate_synthetic,
)
from riskgraph.kernels.gram import gram_frame, gram_matrix
from riskgraph.kernels.kernel_models import KernelConfig, KernelName
from riskgraph.labels.clustering import DEFAULT_K_RANGE
from riskgraph.labels.label_models import FeatureSet
from riskgraph.labels.risk import label_scenes
from riskgraph.pipeline import artifacts
from riskgraph.pipeline.config import digest_of, load_config
from riskgraph.pipeline.exceptions import ArtifactError, ConfigError
from riskgraph.pipeline.figures import REPORT_FILE, emit_figure_data
from riskgraph.pipeline.runner import run_pipeline
from riskgraph.scenes.birds_eye import to_birds_eye
from riskgraph.scenes.extraction import (
    DEFAULT_HORIZON,
    DEFAULT_PERSISTENCE,
    DEFAULT_STRAIGHT_TOL,
    DEFAULT_WINDOW,
    extract_scenes,
    vrm_matrix,
)

logger = logging.getLogger(__name__)

app = typer.Typer(
    name="riskgraph",
    help="Driver-specific risk recognition from driving logs with graph kernels.",
    no_args_is_help=True,
)

ForceOption = Annotated[
    bool, typer.Option("--force", help="Overwrite artifacts of another configuration.")
]


@contextmanager
def reporting_errors() -> Iterator[None]:
    """Turn riskgraph errors into a message on stderr and the error's exit code."""
    try:
        yield
    except RiskGraphError as e:
        typer.echo(f"Error: {e}", err=True)
        raise typer.Exit(code=e.exit_code) from e


def _read_json_input(path: Path, what: str) -> dict[str, Any]:
    if not path.is_file():
        raise ArtifactError(f"{what} file not found: {path}")
    try:
        data: dict[str, Any] = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as e:
        raise ArtifactError(f"{what} file {path} is not valid JSON: {e}") from e
    return data


def _input_digest(path: Path) -> str:
    try:
        return artifacts.stored_digest(path)
    except ArtifactError:
        return ""


def _version(value: bool) -> None:
    if value:
        typer.echo(f"riskgraph {__version__}")
        raise typer.Exit()


@app.callback()
def main(
    verbose: Annotated[
        bool, typer.Option("--verbose", "-v", help="Log debug messages.")
    ] = False,
    quiet: Annotated[
        bool, typer.Option("--quiet", "-q", help="Log warnings and errors only.")
    ] = False,
    version: Annotated[
        bool,
        typer.Option(
            "--version", callback=_version, is_eager=True, help="Show the version."
        ),
    ] = False,
) -> None:
    """Driver-specific risk recognition from driving logs with graph kernels."""
    level = logging.DEBUG if verbose else logging.WARNING if quiet else logging.INFO
    logging.basicConfig(
        level=level,
        stream=sys.stderr,
        format="%(levelname)s %(name)s: %(message)s",
        force=True,
    )


@app.command()
def synth(
    spec: Annotated[Path, typer.Option("--spec", help="Scenario or suite JSON.")],
    seed: Annotated[int, typer.Option("--seed", help="Generator seed.")],
    out: Annotated[Path, typer.Option("--out", help="CSV log to write.")],
    force: ForceOption = False,
) -> None:
    """Generate a synthetic driving log.

    A JSON object with an ``episodes`` key is read as a cut-in suite; anything
    else is read as an explicit scenario.

    Examples:
        .. code-block:: bash

            riskgraph synth --spec resources/demo_scenario.json --seed 1 --out log.csv
    """
    with reporting_errors():
        data = _read_json_input(spec, "Scenario")
        if "episodes" in data:
            scenario = build_suite(SuiteSpec.from_dict(data), seed)
        else:
            scenario = ScenarioSpec.from_dict(data)
        records = generate_synthetic(scenario, seed)
        digest = digest_of({"stage": "synth", "spec": data, "seed": seed})
        artifacts.write_csv_bytes(out, serialize_csv(records), digest, force=force)
        typer.echo(f"Wrote {len(records)} records to {out}", err=True)


@app.command()
def ingest(
    log_file: Annotated[Path, typer.Option("--input", help="CSV driving log.")],
    out: Annotated[Path, typer.Option("--out", help="Frames JSON-Lines to write.")],
    schema: Annotated[
        Path | None, typer.Option("--schema", help="JSON column map.")
    ] = None,
    smooth_span: Annotated[
        int, typer.Option("--smooth-span", help="Smoothing window in samples.")
    ] = DEFAULT_SPAN,
    force: ForceOption = False,
) -> None:
    """Parse, smooth and transform a log into bird's-eye frames.

    Examples:
        .. code-block:: bash

            riskgraph ingest --input log.csv --smooth-span 25 --out frames.jsonl
    """
    with reporting_errors():
        if not log_file.is_file():
            raise ArtifactError(f"Log file not found: {log_file}")
        column_map = (
            LogSchema.from_dict(_read_json_input(schema, "Schema"))
            if schema
            else LogSchema()
        )
        parsed = parse_log(log_file.read_bytes(), column_map)
        frames = [to_birds_eye(r) for r in smooth_records(parsed.records, smooth_span)]
        digest = digest_of(
            {
                "stage": "ingest",
                "input": _input_digest(log_file),
                "schema": column_map.to_dict(),
                "span": smooth_span,
            }
        )
        artifacts.save_frames(out, frames, digest, force=force)
        typer.echo(
            f"Wrote {len(frames)} frames to {out} "
            f"({parsed.skipped_rows} rows skipped)",
            err=True,
        )


@app.command()
def extract(
    frames: Annotated[Path, typer.Option("--frames", help="Frames JSON-Lines.")],
    out: Annotated[Path, typer.Option("--out", help="Scenes JSON-Lines to write.")],
    window: Annotated[int, typer.Option("--window")] = DEFAULT_WINDOW,
    straight_tol: Annotated[
        float, typer.Option("--straight-tol")
    ] = DEFAULT_STRAIGHT_TOL,
    persistence: Annotated[int, typer.Option("--persistence")] = DEFAULT_PERSISTENCE,
    horizon: Annotated[float, typer.Option("--horizon")] = DEFAULT_HORIZON,
    source: Annotated[str, typer.Option("--source", help="Scene id prefix.")] = "log",
    vrm: Annotated[
        Path | None, typer.Option("--vrm", help="Also write lane-change features CSV.")
    ] = None,
    force: ForceOption = False,
) -> None:
    """Cut frames into windows and keep the lane-change scenes.

    Examples:
        .. code-block:: bash

            riskgraph extract --frames frames.jsonl --window 50 --out scenes.jsonl
    """
    with reporting_errors():
        loaded, upstream = artifacts.load_frames(frames)
        scenes = extract_scenes(
            loaded,
            window,
            straight_tol,
            persistence=persistence,
            horizon=horizon,
            source=source,
        )
        digest = digest_of(
            {
                "stage": "extract",
                "input": upstream,
                "window": window,
                "straight_tol": straight_tol,
                "persistence": persistence,
                "horizon": horizon,
                "source": source,
            }
        )
        artifacts.save_scenes(out, scenes, digest, force=force)
        if vrm is not None:
            features = pd.DataFrame(
                vrm_matrix(scenes), columns=["dx", "dy", "dvx", "dvy"]
            )
            features.insert(0, "scene_ref", [s.scene_id for s in scenes])
            artifacts.write_csv(vrm, features, digest, force=force)
        typer.echo(f"Wrote {len(scenes)} scenes to {out}", err=True)


def _parse_k(value: str) -> int | None:
    if value == "auto":
        return None
    try:
        return int(value)
    except ValueError as e:
        raise ConfigError(f"--k must be 'auto' or an integer, got '{value}'.") from e


@app.command()
def label(
    scenes: Annotated[Path, typer.Option("--scenes", help="Scenes JSON-Lines.")],
    out: Annotated[Path, typer.Option("--out", help="Labels JSON to write.")],
    feature: Annotated[
        FeatureSet, typer.Option("--feature", help="Operation features.")
    ] = FeatureSet.ONE,
    k: Annotated[str, typer.Option("--k", help="'auto' or a cluster count.")] = "auto",
    seed: Annotated[int, typer.Option("--seed")] = 0,
    kpca: Annotated[bool, typer.Option("--kpca/--no-kpca")] = False,
    diag: Annotated[
        Path | None, typer.Option("--diag", help="Per-k RSS and silhouette CSV.")
    ] = None,
    force: ForceOption = False,
) -> None:
    """Cluster driver responses into risk levels.

    Examples:
        .. code-block:: bash

            riskgraph label --scenes scenes.jsonl --k auto \\
                --out labels.json --diag diag.csv
    """
    with reporting_errors():
        loaded, upstream = artifacts.load_scenes(scenes)
        chosen = _parse_k(k)
        outcome = label_scenes(
            loaded, feature, chosen, seed, k_range=DEFAULT_K_RANGE, use_kpca=kpca
        )
        digest = digest_of(
            {
                "stage": "label",
                "input": upstream,
                "feature": feature.value,
                "k": k,
                "seed": seed,
                "kpca": kpca,
            }
        )
        artifacts.save_labels(out, outcome.labels, digest, force=force)
        if diag is not None:
            rows = outcome.selection.to_rows() if outcome.selection else []
            frame = pd.DataFrame(rows, columns=["k", "rss", "silhouette"])
            artifacts.write_csv(diag, frame, digest, force=force)
        typer.echo(
            f"k={outcome.labels.k}, level counts {outcome.labels.counts()}", err=True
        )


@app.command()
def graphs(
    scenes: Annotated[Path, typer.Option("--scenes", help="Scenes JSON-Lines.")],
    out: Annotated[Path, typer.Option("--out", help="Graphs JSON-Lines to write.")],
    per_frame: Annotated[
        bool, typer.Option("--per-frame", help="One graph per frame of each scene.")
    ] = False,
    force: ForceOption = False,
) -> None:
    """Build the scene graph of every scene.

    Examples:
        .. code-block:: bash

            riskgraph graphs --scenes scenes.jsonl --out graphs.jsonl
    """
    with reporting_errors():
        loaded, upstream = artifacts.load_scenes(scenes)
        if per_frame:
            built = [g for s in loaded for g in build_frame_graphs(s)]
        else:
            built = [build_scene_graph(s) for s in loaded]
        digest = digest_of(
            {"stage": "graphs", "input": upstream, "per_frame": per_frame}
        )
        artifacts.save_graphs(out, built, digest, force=force)
        typer.echo(f"Wrote {len(built)} graphs to {out}", err=True)


@app.command()
def gram(
    graphs: Annotated[Path, typer.Option("--graphs", help="Graphs JSON-Lines.")],
    out: Annotated[Path, typer.Option("--out", help="Gram matrix file to write.")],
    kernel: Annotated[KernelName, typer.Option("--kernel")] = KernelName.SPGK,
    h: Annotated[int, typer.Option("--h", help="Hash iterations.")] = 3,
    bits: Annotated[int, typer.Option("--bits", help="Hash label width.")] = 16,
    seed: Annotated[int, typer.Option("--seed", help="Label hash seed.")] = 7,
    csv: Annotated[
        Path | None, typer.Option("--csv", help="Also export the values as CSV.")
    ] = None,
    force: ForceOption = False,
) -> None:
    """Compute the Gram matrix of a set of scene graphs.

    Examples:
        .. code-block:: bash

            riskgraph gram --graphs graphs.jsonl --kernel nhgk --h 3 --out gram.bin
    """
    with reporting_errors():
        loaded, upstream = artifacts.load_graphs(graphs)
        config = KernelConfig(name=kernel, h=h, bits=bits, seed=seed)
        matrix = gram_matrix(loaded, config)
        digest = digest_of({"stage": "gram", "input": upstream, **config.to_dict()})
        artifacts.save_kernel(out, matrix, digest, force=force)
        if csv is not None:
            artifacts.write_csv(
                csv, gram_frame(matrix), digest, force=force, index=True
            )
        typer.echo(
            f"Wrote {matrix.n}×{matrix.n} {kernel.value} Gram matrix to {out}",
            err=True,
        )


@app.command()
def train(
    gram: Annotated[Path, typer.Option("--gram", help="Gram matrix file.")],
    labels: Annotated[Path, typer.Option("--labels", help="Labels JSON.")],
    out: Annotated[Path, typer.Option("--out", help="Model JSON to write.")],
    report: Annotated[
        Path | None, typer.Option("--report", help="Cross-validation report JSON.")
    ] = None,
    C: Annotated[float, typer.Option("--C", help="Regularisation constant.")] = 1.0,
    folds: Annotated[int, typer.Option("--folds")] = 5,
    seed: Annotated[int, typer.Option("--seed", help="Fold seed.")] = 0,
    cells: Annotated[
        Path | None, typer.Option("--cells", help="Confusion cells CSV.")
    ] = None,
    force: ForceOption = False,
) -> None:
    """Train an SVM on a precomputed Gram matrix and cross-validate it.

    Examples:
        .. code-block:: bash

            riskgraph train --gram gram.bin --labels labels.json --C 1.0 \\
                --folds 5 --seed 0 --out model.json --report report.json
    """
    with reporting_errors():
        matrix, gram_digest = artifacts.load_kernel(gram)
        label_set, labels_digest = artifacts.load_labels(labels)
        digest = digest_of(
            {
                "stage": "train",
                "gram": gram_digest,
                "labels": labels_digest,
                "C": C,
                "folds": folds,
                "seed": seed,
            }
        )
        model = train_svm(matrix, label_set, C)
        artifacts.save_model(out, model, digest, force=force)
        if report is not None or cells is not None:
            evaluation = cross_validate_gram(matrix, label_set, C, folds, seed)
            if report is not None:
                artifacts.write_json(report, evaluation.to_dict(), digest, force=force)
            if cells is not None:
                artifacts.write_csv(
                    cells, evaluation.confusion.cells(), digest, force=force
                )
            typer.echo(
                f"Cross-validated accuracy {evaluation.confusion.accuracy:.4f}",
                err=True,
            )


@app.command()
def report(
    run_dir: Annotated[
        Path, typer.Option("--run-dir", help="Run output or driver folder.")
    ],
    force: ForceOption = False,
) -> None:
    """Write the figure tables of a finished run.

    Examples:
        .. code-block:: bash

            riskgraph report --run-dir runs/demo
    """
    with reporting_errors():
        top, _ = artifacts.read_json(run_dir / REPORT_FILE)
        if "drivers" in top:
            folders = [run_dir / d["driver_id"] for d in top["drivers"]]
        else:
            folders = [run_dir]
        written = [
            path for folder in folders for path in emit_figure_data(folder, force=force)
        ]
        typer.echo(f"Wrote {len(written)} figure tables", err=True)


@app.command()
def run(
    config: Annotated[Path, typer.Option("--config", help="TOML or JSON config.")],
    force: ForceOption = False,
) -> None:
    """Run every stage for every configured driver.

    Examples:
        .. code-block:: bash

            riskgraph run --config resources/demo.toml
    """
    with reporting_errors():
        loaded = load_config(config)
        result = run_pipeline(loaded, force=force)
        for line in result.comparison().to_string(index=False).splitlines():
            typer.echo(line, err=True)


if __name__ == "__main__":
    app()
