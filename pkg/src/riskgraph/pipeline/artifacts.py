"""Reading and writing stage artifacts stamped with a configuration digest.

JSON artifacts carry ``config_digest`` at top level, JSON-Lines artifacts start
with a header line ``{"artifact": kind, "config_digest": ...}``, CSV artifacts
start with a ``# config_digest=<hex>`` comment and Gram files keep the digest in
their binary header. Writing over an artifact stamped with another digest is
refused unless forced. Loading rebuilds the stored dataclasses, which re-checks
their invariants.
"""

from __future__ import annotations

import json
import logging
from collections.abc import Iterable, Mapping, Sequence
from pathlib import Path
from typing import Any

import pandas as pd

from riskgraph.classify.svm_models import TrainedModel
from riskgraph.exceptions import RiskGraphError
from riskgraph.graphs.graph_models import SceneGraph
from riskgraph.ingest.log_models import DriverLogRecord
from riskgraph.kernels.gram import load_gram, read_gram_header, save_gram
from riskgraph.kernels.kernel_models import KernelMatrix
from riskgraph.labels.label_models import RiskLabelSet
from riskgraph.pipeline.exceptions import ArtifactError, StaleArtifactError
from riskgraph.scenes.scene_models import Scene, SceneFrame

logger = logging.getLogger(__name__)

CSV_DIGEST_PREFIX = "# config_digest="


def stored_digest(path: Path) -> str:
    """Digest recorded in an existing artifact; the suffix selects the format.

    Raises:
        ArtifactError: If the file is missing or carries no readable digest
    """
    if not path.is_file():
        raise ArtifactError(f"Artifact not found: {path}")
    try:
        if path.suffix == ".json":
            document = json.loads(path.read_text(encoding="utf-8"))
            return str(document.get("config_digest", ""))
        if path.suffix == ".jsonl":
            with path.open(encoding="utf-8") as handle:
                return str(json.loads(handle.readline()).get("config_digest", ""))
        if path.suffix == ".csv":
            with path.open(encoding="utf-8") as handle:
                first = handle.readline().strip()
            if first.startswith(CSV_DIGEST_PREFIX):
                return first[len(CSV_DIGEST_PREFIX) :]
            return ""
        if path.suffix == ".bin":
            return str(read_gram_header(path).get("config_digest", ""))
    except (json.JSONDecodeError, UnicodeDecodeError, AttributeError) as e:
        raise ArtifactError(f"Cannot read the header of {path}: {e}") from e
    except RiskGraphError as e:
        raise ArtifactError(str(e)) from e
    raise ArtifactError(f"Unknown artifact type '{path.suffix}' for {path}.")


def check_stale(path: Path, digest: str, force: bool = False) -> None:
    """Refuse to overwrite an artifact written under another configuration.

    Raises:
        StaleArtifactError: If the stored digest differs and ``force`` is False
    """
    if not path.exists():
        return
    try:
        stored = stored_digest(path)
    except ArtifactError:
        stored = ""
    if stored == digest:
        return
    if force:
        logger.warning("Overwriting %s written under digest '%s'", path, stored)
        return
    raise StaleArtifactError(
        f"{path} was written under configuration digest '{stored}', "
        f"current digest is '{digest}'.\n"
        f"Suggestions:\n"
        f"  - Choose another output directory\n"
        f"  - Pass --force to overwrite",
        str(path),
        stored,
        digest,
    )


def _prepare(path: Path, digest: str, force: bool) -> None:
    check_stale(path, digest, force)
    path.parent.mkdir(parents=True, exist_ok=True)


def write_json(
    path: Path, payload: Mapping[str, Any], digest: str, *, force: bool = False
) -> None:
    _prepare(path, digest, force)
    document = {**payload, "config_digest": digest}
    text = json.dumps(document, indent=2, sort_keys=True)
    path.write_text(text + "\n", encoding="utf-8")
    logger.debug("Wrote %s", path)


def read_json(path: Path) -> tuple[dict[str, Any], str]:
    """Payload and digest of a JSON artifact."""
    if not path.is_file():
        raise ArtifactError(f"Artifact not found: {path}")
    try:
        document: dict[str, Any] = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as e:
        raise ArtifactError(f"{path} is not valid JSON: {e}") from e
    digest = str(document.pop("config_digest", ""))
    return document, digest


def write_jsonl(
    path: Path,
    kind: str,
    rows: Iterable[Mapping[str, Any]],
    digest: str,
    *,
    force: bool = False,
) -> int:
    """Write a header line followed by one JSON object per row.

    Returns:
        Number of rows written
    """
    _prepare(path, digest, force)
    count = 0
    with path.open("w", encoding="utf-8") as handle:
        handle.write(json.dumps({"artifact": kind, "config_digest": digest}) + "\n")
        for row in rows:
            handle.write(json.dumps(row, sort_keys=True) + "\n")
            count += 1
    logger.debug("Wrote %d %s rows to %s", count, kind, path)
    return count


def read_jsonl(path: Path, kind: str) -> tuple[list[dict[str, Any]], str]:
    """Rows and digest of a JSON-Lines artifact of the given kind."""
    if not path.is_file():
        raise ArtifactError(f"Artifact not found: {path}")
    lines = path.read_text(encoding="utf-8").splitlines()
    try:
        header = json.loads(lines[0]) if lines else {}
        if header.get("artifact") != kind:
            raise ArtifactError(
                f"{path} holds '{header.get('artifact')}' rows, expected '{kind}'."
            )
        rows = [json.loads(line) for line in lines[1:] if line.strip()]
    except json.JSONDecodeError as e:
        raise ArtifactError(f"{path} has a malformed line: {e}") from e
    return rows, str(header.get("config_digest", ""))


def write_csv(
    path: Path,
    frame: pd.DataFrame,
    digest: str,
    *,
    force: bool = False,
    index: bool = False,
) -> None:
    _prepare(path, digest, force)
    text: str = frame.to_csv(index=index, lineterminator="\n")
    path.write_text(f"{CSV_DIGEST_PREFIX}{digest}\n{text}", encoding="utf-8")
    logger.debug("Wrote %d rows to %s", len(frame), path)


def write_csv_bytes(
    path: Path, content: bytes, digest: str, *, force: bool = False
) -> None:
    """Write ready-made CSV content such as a serialized log."""
    _prepare(path, digest, force)
    path.write_bytes(f"{CSV_DIGEST_PREFIX}{digest}\n".encode() + content)
    logger.debug("Wrote %s", path)


def read_csv(path: Path) -> tuple[pd.DataFrame, str]:
    if not path.is_file():
        raise ArtifactError(f"Artifact not found: {path}")
    return pd.read_csv(path, comment="#"), stored_digest(path)


def _rebuild(path: Path, build: Any, rows: Sequence[Any]) -> list[Any]:
    try:
        return [build(row) for row in rows]
    except (KeyError, TypeError, ValueError) as e:
        raise ArtifactError(f"{path} holds a malformed entry: {e!r}") from e


def save_records(
    path: Path, records: Sequence[DriverLogRecord], digest: str, *, force: bool = False
) -> None:
    write_jsonl(path, "records", (r.to_dict() for r in records), digest, force=force)


def load_records(path: Path) -> tuple[list[DriverLogRecord], str]:
    rows, digest = read_jsonl(path, "records")
    return _rebuild(path, DriverLogRecord.from_dict, rows), digest


def save_scenes(
    path: Path, scenes: Sequence[Scene], digest: str, *, force: bool = False
) -> None:
    write_jsonl(path, "scenes", (s.to_dict() for s in scenes), digest, force=force)


def load_scenes(path: Path) -> tuple[list[Scene], str]:
    rows, digest = read_jsonl(path, "scenes")
    return _rebuild(path, Scene.from_dict, rows), digest


def save_graphs(
    path: Path, graphs: Sequence[SceneGraph], digest: str, *, force: bool = False
) -> None:
    write_jsonl(path, "graphs", (g.to_dict() for g in graphs), digest, force=force)


def load_graphs(path: Path) -> tuple[list[SceneGraph], str]:
    rows, digest = read_jsonl(path, "graphs")
    return _rebuild(path, SceneGraph.from_dict, rows), digest


def save_labels(
    path: Path, labels: RiskLabelSet, digest: str, *, force: bool = False
) -> None:
    write_json(path, labels.to_dict(), digest, force=force)


def load_labels(path: Path) -> tuple[RiskLabelSet, str]:
    payload, digest = read_json(path)
    return _rebuild(path, RiskLabelSet.from_dict, [payload])[0], digest


def save_model(
    path: Path, model: TrainedModel, digest: str, *, force: bool = False
) -> None:
    write_json(path, model.to_dict(), digest, force=force)


def load_model(path: Path) -> tuple[TrainedModel, str]:
    payload, digest = read_json(path)
    return _rebuild(path, TrainedModel.from_dict, [payload])[0], digest


def save_kernel(
    path: Path, matrix: KernelMatrix, digest: str, *, force: bool = False
) -> None:
    _prepare(path, digest, force)
    save_gram(path, matrix, digest)


def load_kernel(path: Path) -> tuple[KernelMatrix, str]:
    if not path.is_file():
        raise ArtifactError(f"Artifact not found: {path}")
    return load_gram(path)



def save_frames(
    path: Path, frames: Sequence[SceneFrame], digest: str, *, force: bool = False
) -> None:
    write_jsonl(path, "frames", (f.to_dict() for f in frames), digest, force=force)


def load_frames(path: Path) -> tuple[list[SceneFrame], str]:
    rows, digest = read_jsonl(path, "frames")
    return _rebuild(path, SceneFrame.from_dict, rows), digest
