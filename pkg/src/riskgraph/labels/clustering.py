"""Feature normalisation, k-means, silhouette values and cluster-count choice."""

from __future__ import annotations

import logging
from collections.abc import Iterable, Sequence

import numpy as np
import numpy.typing as npt
from scipy.spatial.distance import pdist, squareform
from sklearn.cluster import kmeans_plusplus
from sklearn.metrics import silhouette_samples

from riskgraph.labels.exceptions import ClusteringError, SilhouetteUndefinedError
from riskgraph.labels.label_models import ClusteringResult, KScore, KSelection

logger = logging.getLogger(__name__)

_Candidate = tuple[npt.NDArray[np.float64], npt.NDArray[np.int64], list[float]]

MAX_ITERATIONS = 300
RESTARTS = 10
DEFAULT_K_RANGE = range(2, 11)


def _as_points(points: npt.ArrayLike) -> npt.NDArray[np.float64]:
    x = np.asarray(points, dtype=np.float64)
    if x.ndim == 1:
        x = x.reshape(-1, 1)
    if x.ndim != 2:
        raise ClusteringError(f"Points must form an n×d matrix, got shape {x.shape}.")
    if not np.all(np.isfinite(x)):
        raise ClusteringError("Points contain non-finite values.")
    return x


def normalize_features(points: npt.ArrayLike) -> npt.NDArray[np.float64]:
    """Map every column linearly onto [-1, 1].

    Each column is transformed by ``2 (x - (max + min) / 2) / (max - min)``; the
    column extrema land exactly on -1 and 1. A constant column becomes zeros.

    Args:
        points: n×d matrix with n >= 2

    Returns:
        Normalised copy of the matrix

    Raises:
        ClusteringError: If fewer than two points are given
    """
    x = _as_points(points)
    if x.shape[0] < 2:
        raise ClusteringError(
            f"Normalisation needs at least 2 points, got {x.shape[0]}."
        )
    result = np.zeros_like(x)
    for j in range(x.shape[1]):
        column = x[:, j]
        low, high = column.min(), column.max()
        if high == low:
            logger.warning("Column %d is constant (%g); mapped to zeros", j, low)
            continue
        scaled = 2.0 * (column - 0.5 * (high + low)) / (high - low)
        scaled = np.clip(scaled, -1.0, 1.0)
        scaled[column == low] = -1.0
        scaled[column == high] = 1.0
        result[:, j] = scaled
    return result


def nearest_centroid(
    points: npt.NDArray[np.float64], centroids: npt.NDArray[np.float64]
) -> npt.NDArray[np.int64]:
    """Index of the closest centroid for every point; ties go to the lowest index."""
    distances = ((points[:, None, :] - centroids[None, :, :]) ** 2).sum(axis=2)
    nearest: npt.NDArray[np.int64] = np.argmin(distances, axis=1).astype(np.int64)
    return nearest


def _rss(
    points: npt.NDArray[np.float64],
    centroids: npt.NDArray[np.float64],
    assignments: npt.NDArray[np.int64],
) -> float:
    return float(((points - centroids[assignments]) ** 2).sum())


def rss(points: npt.ArrayLike, result: ClusteringResult) -> float:
    """Within-cluster residual sum of squares of a clustering."""
    x = _as_points(points)
    assignments = np.asarray(result.assignments, dtype=np.int64)
    if assignments.shape[0] != x.shape[0]:
        raise ClusteringError(
            f"{assignments.shape[0]} assignments for {x.shape[0]} points."
        )
    return _rss(x, result.centroid_array, assignments)


def _lloyd(
    points: npt.NDArray[np.float64],
    initial: npt.NDArray[np.float64],
    max_iterations: int,
) -> tuple[npt.NDArray[np.float64], npt.NDArray[np.int64], list[float]]:
    centroids = initial.copy()
    assignments = nearest_centroid(points, centroids)
    history = [_rss(points, centroids, assignments)]
    for _ in range(max_iterations):
        updated = centroids.copy()
        for cluster in range(centroids.shape[0]):
            members = points[assignments == cluster]
            if members.shape[0]:
                updated[cluster] = members.mean(axis=0)
        empty = [c for c in range(centroids.shape[0]) if not np.any(assignments == c)]
        if empty:
            spread = ((points - updated[assignments]) ** 2).sum(axis=1)
            for cluster in empty:
                farthest = int(np.argmax(spread))
                updated[cluster] = points[farthest]
                spread[farthest] = -1.0
        new_assignments = nearest_centroid(points, updated)
        value = _rss(points, updated, new_assignments)
        assert value <= history[-1] * (1 + 1e-12) + 1e-12, "RSS increased"
        history.append(value)
        converged = np.array_equal(new_assignments, assignments)
        centroids, assignments = updated, new_assignments
        if converged:
            break
    else:
        logger.debug("Lloyd iterations stopped at the cap of %d", max_iterations)
    return centroids, assignments, history


def silhouette(
    points: npt.ArrayLike, assignments: Sequence[int] | npt.ArrayLike
) -> tuple[npt.NDArray[np.float64], float]:
    """Per-point silhouette values and their mean.

    A point alone in its cluster scores 0.

    Args:
        points: n×d matrix
        assignments: Cluster index of every point

    Returns:
        (per-point values, mean value)

    Raises:
        SilhouetteUndefinedError: If fewer than two clusters are populated
    """
    x = _as_points(points)
    labels = np.asarray(assignments, dtype=np.int64)
    if labels.shape[0] != x.shape[0]:
        raise ClusteringError(f"{labels.shape[0]} assignments for {x.shape[0]} points.")
    populated = np.unique(labels)
    if populated.shape[0] < 2:
        raise SilhouetteUndefinedError(
            "Silhouette values need at least two populated clusters.\n"
            "Suggestion: choose k >= 2 and check the data has distinct points"
        )
    if populated.shape[0] == x.shape[0]:
        values = np.zeros(x.shape[0])
    else:
        distances = squareform(pdist(x))
        values = silhouette_samples(distances, labels, metric="precomputed")
    return values, float(values.mean())


def kmeans(
    points: npt.ArrayLike,
    k: int,
    seed: int = 0,
    *,
    restarts: int = RESTARTS,
    max_iterations: int = MAX_ITERATIONS,
) -> ClusteringResult:
    """K-means with k-means++ seeding and Lloyd iterations.

    Args:
        points: n×d matrix
        k: Number of clusters, 1 <= k <= n
        seed: Seed of the restart sequence
        restarts: Independent runs; the lowest RSS wins, earliest on ties
        max_iterations: Lloyd iteration cap per run

    Returns:
        ClusteringResult of the best run; its silhouette is None when k is 1
        or when fewer than two clusters end up populated

    Raises:
        ClusteringError: If k is outside 1..n
    """
    x = _as_points(points)
    if not 1 <= k <= x.shape[0]:
        raise ClusteringError(
            f"k={k} is outside 1..{x.shape[0]} for {x.shape[0]} points.\n"
            f"Suggestion: narrow the k range or provide more scenes"
        )
    rng = np.random.default_rng(seed)
    best: _Candidate | None = None
    for _ in range(restarts):
        initial, _indices = kmeans_plusplus(
            x, n_clusters=k, random_state=int(rng.integers(0, 2**31 - 1))
        )
        run = _lloyd(x, np.asarray(initial, dtype=np.float64), max_iterations)
        if best is None or run[2][-1] < best[2][-1]:
            best = run
    assert best is not None
    centroids, assignments, history = best

    score: float | None = None
    if k > 1:
        try:
            _, score = silhouette(x, assignments)
        except SilhouetteUndefinedError:
            logger.warning("k=%d left fewer than two populated clusters", k)
    return ClusteringResult(
        k=k,
        assignments=tuple(int(a) for a in assignments),
        centroids=tuple(tuple(float(v) for v in c) for c in centroids),
        rss=history[-1],
        silhouette=score,
        seed=seed,
        rss_history=tuple(history),
    )


def choose_k(table: Iterable[KScore]) -> int:
    """Cluster count with the highest silhouette coefficient; ties go to the smaller k.

    Raises:
        ClusteringError: If the table is empty
    """
    best: KScore | None = None
    for score in sorted(table, key=lambda s: s.k):
        if best is None or score.silhouette > best.silhouette:
            best = score
    if best is None:
        raise ClusteringError("No cluster count could be scored.")
    return best.k


def select_k(
    points: npt.ArrayLike,
    k_range: Iterable[int] = DEFAULT_K_RANGE,
    seed: int = 0,
    *,
    restarts: int = RESTARTS,
) -> KSelection:
    """Cluster for every k in range and pick k by the silhouette coefficient.

    Values of k above the number of points, or whose clustering populates fewer
    than two clusters, are skipped with a warning.

    Returns:
        KSelection with the chosen k and the RSS/SC table for elbow inspection
    """
    x = _as_points(points)
    table: list[KScore] = []
    for k in k_range:
        if k > x.shape[0]:
            logger.warning("Skipping k=%d: only %d points", k, x.shape[0])
            continue
        result = kmeans(x, k, seed, restarts=restarts)
        if result.silhouette is None:
            logger.warning("Skipping k=%d: silhouette undefined", k)
            continue
        table.append(KScore(k=k, rss=result.rss, silhouette=result.silhouette))
        logger.debug("k=%d rss=%.4f sc=%.4f", k, result.rss, result.silhouette)
    return KSelection(k=choose_k(table), table=tuple(table))
