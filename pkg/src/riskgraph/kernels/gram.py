"""Gram matrix assembly and persistence.

Binary Gram files hold one JSON header line followed by the row-major values
as little-endian 64-bit floats.
"""

from __future__ import annotations

import json
import logging
from collections.abc import Sequence
from pathlib import Path
from typing import Any

import numpy as np
import numpy.typing as npt
import pandas as pd

from riskgraph.graphs.graph_models import SceneGraph
from riskgraph.kernels.exceptions import KernelError
from riskgraph.kernels.graph_kernels import (
    hash_iterations,
    nhgk_from_rounds,
    shortest_paths,
)
from riskgraph.kernels.kernel_models import KernelConfig, KernelMatrix, KernelName

logger = logging.getLogger(__name__)

GRAM_MAGIC = "riskgraph-gram"


def _spgk_values(
    graphs: Sequence[SceneGraph], normalize: bool
) -> npt.NDArray[np.float64]:
    signatures = [shortest_paths(g).signature() for g in graphs]
    vocabulary = sorted({key for s in signatures for key in s})
    column = {key: j for j, key in enumerate(vocabulary)}
    counts = np.zeros((len(graphs), len(vocabulary)))
    for i, signature in enumerate(signatures):
        for key, count in signature.items():
            counts[i, column[key]] = count
    # Integer counts keep the product exact, so each entry equals spgk().
    raw: npt.NDArray[np.float64] = counts @ counts.T
    if not normalize:
        return raw
    diagonal = np.diag(raw)
    scale = np.sqrt(np.outer(diagonal, diagonal))
    with np.errstate(divide="ignore", invalid="ignore"):
        values = np.where(scale > 0, raw / np.where(scale > 0, scale, 1.0), 0.0)
    normalized: npt.NDArray[np.float64] = values
    return normalized


def _nhgk_values(
    graphs: Sequence[SceneGraph], config: KernelConfig
) -> npt.NDArray[np.float64]:
    rounds = [hash_iterations(g, config.h, config.bits, config.seed) for g in graphs]
    sizes = [len(g.nodes) for g in graphs]
    n = len(graphs)
    values = np.zeros((n, n))
    for i in range(n):
        values[i, i] = nhgk_from_rounds(rounds[i], sizes[i], rounds[i], sizes[i])
        for j in range(i + 1, n):
            value = nhgk_from_rounds(rounds[i], sizes[i], rounds[j], sizes[j])
            values[i, j] = value
            values[j, i] = value
    return values


def gram_matrix(
    graphs: Sequence[SceneGraph], config: KernelConfig | None = None
) -> KernelMatrix:
    """Pairwise kernel values of a set of scene graphs.

    Args:
        graphs: At least two scene graphs
        config: Kernel choice and parameters; shortest-path kernel by default

    Returns:
        Validated KernelMatrix whose refs are the graphs' scene references

    Raises:
        KernelError: If fewer than two graphs are given
        KernelNotPSDError: If the matrix fails the semi-definiteness check
    """
    config = config or KernelConfig()
    if len(graphs) < 2:
        raise KernelError(f"A Gram matrix needs at least 2 graphs, got {len(graphs)}.")
    if config.name is KernelName.SPGK:
        values = _spgk_values(graphs, config.normalize)
    elif config.name is KernelName.NHGK:
        values = _nhgk_values(graphs, config)
    else:
        raise KernelError(
            "The linear kernel works on feature vectors; use linear_gram."
        )
    degenerate = int(np.sum(np.all(values == 0.0, axis=1)))
    if degenerate:
        logger.warning(
            "%d of %d graphs have no node pairs and get an all-zero kernel row",
            degenerate,
            len(graphs),
        )
    matrix = KernelMatrix(
        values=values,
        config=config,
        refs=tuple(g.scene_ref for g in graphs),
        degenerate=degenerate,
    )
    logger.info(
        "Built %s Gram matrix over %d graphs (eigenvalues %.3e..%.3e)",
        config.name.value,
        matrix.n,
        matrix.min_eigenvalue,
        matrix.max_eigenvalue,
    )
    return matrix


def linear_gram(
    features: npt.ArrayLike, refs: Sequence[str] = ()
) -> KernelMatrix:
    """Linear kernel X·Xᵀ of feature vectors."""
    x = np.asarray(features, dtype=np.float64)
    if x.ndim != 2 or x.shape[0] < 2:
        raise KernelError(
            f"Linear kernel needs an n×d matrix with n >= 2, got {x.shape}."
        )
    values = x @ x.T
    values = (values + values.T) / 2.0
    return KernelMatrix(
        values=values, config=KernelConfig(name=KernelName.LINEAR), refs=tuple(refs)
    )


def save_gram(path: Path, matrix: KernelMatrix, config_digest: str = "") -> None:
    """Write a Gram matrix as a JSON header line plus raw float64 values."""
    header: dict[str, Any] = {
        "format": GRAM_MAGIC,
        "n": matrix.n,
        "kernel": matrix.config.name.value,
        "params": matrix.config.to_dict(),
        "seed": matrix.config.seed,
        "refs": list(matrix.refs),
        "degenerate": matrix.degenerate,
        "config_digest": config_digest,
    }
    payload = np.ascontiguousarray(matrix.values, dtype="<f8").tobytes()
    path.write_bytes(json.dumps(header, sort_keys=True).encode() + b"\n" + payload)


def read_gram_header(path: Path) -> dict[str, Any]:
    with path.open("rb") as handle:
        line = handle.readline()
    try:
        header: dict[str, Any] = json.loads(line)
    except json.JSONDecodeError as e:
        raise KernelError(f"{path} does not start with a Gram header: {e}") from e
    if header.get("format") != GRAM_MAGIC:
        raise KernelError(f"{path} is not a riskgraph Gram file.")
    return header


def load_gram(path: Path) -> tuple[KernelMatrix, str]:
    """Read a Gram matrix written by :func:`save_gram`.

    Returns:
        The re-validated matrix and the config digest stored with it

    Raises:
        KernelError: If the file is truncated or the header is malformed
        KernelNotPSDError: If the stored values are not semi-definite
    """
    header = read_gram_header(path)
    content = path.read_bytes()
    payload = content[content.index(b"\n") + 1 :]
    n = int(header["n"])
    if len(payload) != 8 * n * n:
        raise KernelError(
            f"{path} holds {len(payload)} value bytes, expected {8 * n * n} for n={n}."
        )
    values = np.frombuffer(payload, dtype="<f8").reshape(n, n).astype(np.float64)
    matrix = KernelMatrix(
        values=values,
        config=KernelConfig.from_dict(header["params"]),
        refs=tuple(header.get("refs", ())),
        degenerate=int(header.get("degenerate", 0)),
    )
    return matrix, str(header.get("config_digest", ""))


def gram_frame(matrix: KernelMatrix) -> pd.DataFrame:
    """Gram values labelled by scene reference, for CSV export."""
    labels = list(matrix.refs) or [str(i) for i in range(matrix.n)]
    return pd.DataFrame(matrix.values, index=labels, columns=labels)
