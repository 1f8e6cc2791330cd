"""Driver-specific risk labels.

This module clusters the deceleration responses of a driver to generate risk
levels: feature normalisation, k-means, kernel PCA, residual sums of squares,
silhouette values, cluster-count selection and the mapping from clusters to
ordered levels.
"""

from __future__ import annotations

from riskgraph.labels.clustering import (
    DEFAULT_K_RANGE,
    choose_k,
    kmeans,
    nearest_centroid,
    normalize_features,
    rss,
    select_k,
    silhouette,
)
from riskgraph.labels.exceptions import (
    ClusteringError,
    DegenerateLabelError,
    LabelError,
    SilhouetteUndefinedError,
)
from riskgraph.labels.kpca import (
    KpcaProjection,
    center_kernel,
    kpca_project,
    median_gamma,
    rbf_kernel,
)
from riskgraph.labels.label_models import (
    ClusteringResult,
    FeatureSet,
    KScore,
    KSelection,
    OpFeature,
    RiskLabelSet,
    feature_matrix,
)
from riskgraph.labels.risk import (
    LabelingOutcome,
    cluster_histograms,
    clustering_points,
    compare_feature_clusterings,
    label_scenes,
    to_risk_levels,
)

__all__ = [
    "DEFAULT_K_RANGE",
    "ClusteringError",
    "ClusteringResult",
    "DegenerateLabelError",
    "FeatureSet",
    "KScore",
    "KSelection",
    "KpcaProjection",
    "LabelError",
    "LabelingOutcome",
    "OpFeature",
    "RiskLabelSet",
    "SilhouetteUndefinedError",
    "center_kernel",
    "choose_k",
    "cluster_histograms",
    "clustering_points",
    "compare_feature_clusterings",
    "feature_matrix",
    "kmeans",
    "kpca_project",
    "label_scenes",
    "median_gamma",
    "nearest_centroid",
    "normalize_features",
    "rbf_kernel",
    "rss",
    "select_k",
    "silhouette",
    "to_risk_levels",
]
