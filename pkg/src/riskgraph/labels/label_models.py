"""Data models for risk labelling.

This module defines the driver operation features that are clustered, the
result of one clustering run, the per-k selection table and the final
per-scene risk levels.
"""

from __future__ import annotations

import math
from collections.abc import Mapping, Sequence
from dataclasses import dataclass
from enum import Enum
from typing import Any

import numpy as np
import numpy.typing as npt

from riskgraph.labels.exceptions import ClusteringError, LabelError


class FeatureSet(Enum):
    """Which operation signals describe a driver response.

    Attributes:
        ONE: Longitudinal acceleration only
        TWO: Longitudinal and lateral acceleration, steering, brake and throttle
    """

    ONE = "one"
    TWO = "two"


@dataclass(frozen=True)
class OpFeature:
    """Driver operation signals at the response instant of a scene.

    Attributes:
        ax: Longitudinal acceleration in m/s²
        ay: Lateral acceleration in m/s²
        steer: Front-wheel angle in radians
        brake: Brake signal in [0, 1]
        throttle: Throttle opening in [0, 1]
    """

    ax: float
    ay: float
    steer: float
    brake: float
    throttle: float

    def __post_init__(self) -> None:
        values = (self.ax, self.ay, self.steer, self.brake, self.throttle)
        if not all(math.isfinite(v) for v in values):
            raise LabelError(f"Operation feature has non-finite values: {values}")

    def vector(self, features: FeatureSet = FeatureSet.ONE) -> tuple[float, ...]:
        if features is FeatureSet.ONE:
            return (self.ax,)
        return (self.ax, self.ay, self.steer, self.brake, self.throttle)

    def to_dict(self) -> dict[str, float]:
        return {
            "ax": self.ax,
            "ay": self.ay,
            "steer": self.steer,
            "brake": self.brake,
            "throttle": self.throttle,
        }

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> OpFeature:
        return cls(
            ax=float(data["ax"]),
            ay=float(data["ay"]),
            steer=float(data["steer"]),
            brake=float(data["brake"]),
            throttle=float(data["throttle"]),
        )


def feature_matrix(
    ops: Sequence[OpFeature], features: FeatureSet = FeatureSet.ONE
) -> npt.NDArray[np.float64]:
    """Stacks operation features into an n×d matrix."""
    width = 1 if features is FeatureSet.ONE else 5
    if not ops:
        return np.zeros((0, width))
    return np.array([op.vector(features) for op in ops], dtype=np.float64)


@dataclass(frozen=True)
class ClusteringResult:
    """Outcome of a k-means run.

    Attributes:
        k: Number of clusters
        assignments: Cluster index of every point
        centroids: Mean vector of every cluster
        rss: Residual sum of squares of the assignment
        silhouette: Mean silhouette value, None when k is 1
        seed: Seed the run was started from
        rss_history: RSS after every Lloyd iteration of the winning restart
    """

    k: int
    assignments: tuple[int, ...]
    centroids: tuple[tuple[float, ...], ...]
    rss: float
    silhouette: float | None
    seed: int
    rss_history: tuple[float, ...] = ()

    def __post_init__(self) -> None:
        if len(self.centroids) != self.k:
            raise ClusteringError(
                f"Expected {self.k} centroids, got {len(self.centroids)}."
            )
        if any(not 0 <= a < self.k for a in self.assignments):
            raise ClusteringError("Assignment outside the cluster range.")
        if self.rss < 0:
            raise ClusteringError(f"RSS must be non-negative, got {self.rss}.")
        if self.silhouette is not None and not -1.0 <= self.silhouette <= 1.0:
            raise ClusteringError(f"Silhouette {self.silhouette} outside [-1, 1].")

    @property
    def centroid_array(self) -> npt.NDArray[np.float64]:
        return np.array(self.centroids, dtype=np.float64)

    def to_dict(self) -> dict[str, Any]:
        return {
            "k": self.k,
            "assignments": list(self.assignments),
            "centroids": [list(c) for c in self.centroids],
            "rss": self.rss,
            "silhouette": self.silhouette,
            "seed": self.seed,
        }


@dataclass(frozen=True)
class KScore:
    """RSS and silhouette coefficient of the best clustering for one k."""

    k: int
    rss: float
    silhouette: float


@dataclass(frozen=True)
class KSelection:
    """Chosen cluster count together with the full per-k table."""

    k: int
    table: tuple[KScore, ...]

    def to_rows(self) -> list[dict[str, float]]:
        return [
            {"k": s.k, "rss": s.rss, "silhouette": s.silhouette} for s in self.table
        ]


@dataclass(frozen=True)
class RiskLabelSet:
    """Per-scene risk levels.

    Level 1 is the strongest braking cluster. Level ``k + 1`` collects the
    scenes whose response was not a deceleration ("not dangerous").

    Attributes:
        scene_refs: Identifier of every labelled scene
        levels: Risk level of every scene, aligned with ``scene_refs``
        k: Number of braking clusters
        centroid_ax: Mean response ax of levels 1..k
    """

    scene_refs: tuple[str, ...]
    levels: tuple[int, ...]
    k: int
    centroid_ax: tuple[float, ...] = ()

    def __post_init__(self) -> None:
        if len(self.scene_refs) != len(self.levels):
            raise LabelError(
                f"{len(self.scene_refs)} scene references but "
                f"{len(self.levels)} levels."
            )
        if self.k < 1:
            raise LabelError(f"A label set needs at least one cluster, got k={self.k}.")
        bad = [lv for lv in self.levels if not 1 <= lv <= self.level_count]
        if bad:
            raise LabelError(
                f"Levels {sorted(set(bad))} outside 1..{self.level_count}."
            )
        if self.centroid_ax and list(self.centroid_ax) != sorted(self.centroid_ax):
            raise LabelError("Level centroids must ascend from strongest braking.")

    @property
    def level_count(self) -> int:
        return self.k + 1

    def counts(self) -> dict[int, int]:
        """Number of scenes per level, every level present."""
        result = {level: 0 for level in range(1, self.level_count + 1)}
        for level in self.levels:
            result[level] += 1
        return result

    def to_dict(self) -> dict[str, Any]:
        return {
            "k": self.k,
            "level_count": self.level_count,
            "centroid_ax": list(self.centroid_ax),
            "labels": [
                {"scene_ref": ref, "level": level}
                for ref, level in zip(self.scene_refs, self.levels)
            ],
        }

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> RiskLabelSet:
        labels = data["labels"]
        result = cls(
            scene_refs=tuple(str(item["scene_ref"]) for item in labels),
            levels=tuple(int(item["level"]) for item in labels),
            k=int(data["k"]),
            centroid_ax=tuple(float(c) for c in data.get("centroid_ax", ())),
        )
        if "level_count" in data and int(data["level_count"]) != result.level_count:
            raise LabelError(
                f"level_count {data['level_count']} does not equal k + 1 = "
                f"{result.level_count}."
            )
        return result
