"""Risk levels from clustered driver responses.

Only scenes in which the driver decelerated are clustered. Clusters are ranked
from strongest to weakest mean deceleration to give levels 1..k, and every
scene without a deceleration is put in the "not dangerous" level k + 1.
"""

from __future__ import annotations

import logging
from collections.abc import Iterable, Sequence
from dataclasses import dataclass
from typing import TYPE_CHECKING

import numpy as np
import numpy.typing as npt
import pandas as pd

from riskgraph.labels.clustering import (
    DEFAULT_K_RANGE,
    kmeans,
    normalize_features,
    select_k,
)
from riskgraph.labels.exceptions import DegenerateLabelError, LabelError
from riskgraph.labels.kpca import kpca_project
from riskgraph.labels.label_models import (
    ClusteringResult,
    FeatureSet,
    KSelection,
    OpFeature,
    RiskLabelSet,
    feature_matrix,
)

if TYPE_CHECKING:
    from riskgraph.scenes.scene_models import Scene

logger = logging.getLogger(__name__)


def to_risk_levels(
    result: ClusteringResult,
    response_ax: Sequence[float],
    scene_refs: Sequence[str] | None = None,
) -> RiskLabelSet:
    """Turn a clustering of the braking scenes into per-scene risk levels.

    Args:
        result: Clustering of the scenes with negative response, in scene order
        response_ax: Response acceleration of every scene
        scene_refs: Scene identifiers; positions are used when omitted

    Returns:
        RiskLabelSet with k + 1 levels

    Raises:
        DegenerateLabelError: If no scene has a negative response
        LabelError: If the clustering does not match the braking scenes
    """
    responses = np.asarray(response_ax, dtype=np.float64)
    braking = np.flatnonzero(responses < 0.0)
    if braking.size == 0:
        raise DegenerateLabelError(
            f"None of the {responses.size} scenes has a braking response, so there "
            f"is nothing to cluster.\n"
            f"Suggestions:\n"
            f"  - Check that ax is logged in m/s² with braking negative\n"
            f"  - Extract scenes from a longer drive"
        )
    if len(result.assignments) != braking.size:
        raise LabelError(
            f"Clustering covers {len(result.assignments)} points but "
            f"{braking.size} scenes have a braking response."
        )

    assignments = np.asarray(result.assignments)
    means: list[float] = []
    for cluster in range(result.k):
        members = responses[braking[assignments == cluster]]
        means.append(float(members.mean()) if members.size else 0.0)
    order = sorted(range(result.k), key=lambda c: (means[c], c))
    level_of = {cluster: rank + 1 for rank, cluster in enumerate(order)}

    levels = np.full(responses.size, result.k + 1, dtype=np.int64)
    levels[braking] = [level_of[int(a)] for a in assignments]
    refs = (
        tuple(scene_refs)
        if scene_refs is not None
        else tuple(str(i) for i in range(responses.size))
    )
    return RiskLabelSet(
        scene_refs=refs,
        levels=tuple(int(level) for level in levels),
        k=result.k,
        centroid_ax=tuple(means[c] for c in order),
    )


def clustering_points(
    ops: Sequence[OpFeature],
    features: FeatureSet,
    use_kpca: bool,
    *,
    components: int = 2,
    gamma: float | None = None,
) -> npt.NDArray[np.float64]:
    """Points handed to k-means for a feature choice.

    Feature One is the raw longitudinal acceleration. Feature Two is normalised
    column by column and optionally projected with kernel PCA.
    """
    points = feature_matrix(ops, features)
    if features is FeatureSet.TWO and points.shape[0] >= 2:
        points = normalize_features(points)
    if use_kpca and points.shape[0] >= 2:
        points = kpca_project(points, gamma, components).points
    return points


@dataclass(frozen=True)
class LabelingOutcome:
    """Risk labels together with the clustering that produced them."""

    labels: RiskLabelSet
    clustering: ClusteringResult
    selection: KSelection | None


def label_scenes(
    scenes: Sequence[Scene],
    features: FeatureSet = FeatureSet.ONE,
    k: int | None = None,
    seed: int = 0,
    *,
    k_range: Iterable[int] = DEFAULT_K_RANGE,
    use_kpca: bool = False,
    components: int = 2,
    gamma: float | None = None,
) -> LabelingOutcome:
    """Cluster the braking responses of scenes and assign risk levels.

    Args:
        scenes: Extracted scenes
        features: Operation signals to cluster
        k: Cluster count, or None to choose it by silhouette over ``k_range``
        seed: Clustering seed
        k_range: Candidate cluster counts for automatic choice
        use_kpca: Project the features with kernel PCA before clustering
        components: Kernel PCA components
        gamma: Kernel PCA bandwidth; median heuristic when None

    Returns:
        LabelingOutcome

    Raises:
        DegenerateLabelError: If no scene has a braking response
    """
    responses = [scene.response_ax for scene in scenes]
    braking = [scene for scene in scenes if scene.response_ax < 0.0]
    if not braking:
        raise DegenerateLabelError(
            f"None of the {len(scenes)} scenes has a braking response.\n"
            f"Suggestion: check the response horizon and the sign of ax"
        )
    points = clustering_points(
        [s.response_op for s in braking],
        features,
        use_kpca,
        components=components,
        gamma=gamma,
    )

    selection: KSelection | None = None
    if k is None:
        candidates = [c for c in k_range if c <= len(braking)]
        if len(braking) < 3 or not candidates:
            logger.warning(
                "Only %d braking scenes; using a single braking level", len(braking)
            )
            k = 1
        else:
            selection = select_k(points, candidates, seed)
            k = selection.k
    result = kmeans(points, k, seed)
    labels = to_risk_levels(result, responses, [s.scene_id for s in scenes])
    logger.info(
        "Labelled %d scenes into %d levels (counts %s)",
        len(scenes),
        labels.level_count,
        labels.counts(),
    )
    return LabelingOutcome(labels=labels, clustering=result, selection=selection)


def compare_feature_clusterings(
    scenes: Sequence[Scene],
    k_range: Iterable[int] = DEFAULT_K_RANGE,
    seed: int = 0,
    *,
    components: int = 2,
) -> dict[str, KSelection]:
    """RSS and silhouette tables of the three clustering variants.

    Returns:
        Mapping of "one_kmc", "two_kmc" and "two_kpca_kmc" to their k tables
    """
    braking = [s.response_op for s in scenes if s.response_ax < 0.0]
    candidates = [k for k in k_range if k <= len(braking)]
    if not candidates:
        raise DegenerateLabelError(
            f"Need at least {min(k_range, default=2)} braking scenes to compare "
            f"clusterings, got {len(braking)}."
        )
    variants = {
        "one_kmc": (FeatureSet.ONE, False),
        "two_kmc": (FeatureSet.TWO, False),
        "two_kpca_kmc": (FeatureSet.TWO, True),
    }
    return {
        name: select_k(
            clustering_points(braking, features, kpca, components=components),
            candidates,
            seed,
        )
        for name, (features, kpca) in variants.items()
    }


def cluster_histograms(
    labels: RiskLabelSet, response_ax: Sequence[float], bins: int = 20
) -> pd.DataFrame:
    """Histogram of response ax per risk level on shared bin edges.

    Returns:
        DataFrame with columns level, bin_left, bin_right, count
    """
    responses = np.asarray(response_ax, dtype=np.float64)
    if responses.size != len(labels.levels):
        raise LabelError(
            f"{responses.size} responses for {len(labels.levels)} labelled scenes."
        )
    edges = np.histogram_bin_edges(responses, bins=bins)
    levels = np.asarray(labels.levels)
    rows = []
    for level in range(1, labels.level_count + 1):
        counts, _ = np.histogram(responses[levels == level], bins=edges)
        for left, right, count in zip(edges[:-1], edges[1:], counts):
            rows.append(
                {
                    "level": level,
                    "bin_left": float(left),
                    "bin_right": float(right),
                    "count": int(count),
                }
            )
    return pd.DataFrame(rows, columns=["level", "bin_left", "bin_right", "count"])
