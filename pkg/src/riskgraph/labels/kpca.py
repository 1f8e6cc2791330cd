"""Kernel principal component projection with an RBF kernel."""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
import numpy.typing as npt
from scipy.linalg import eigh
from scipy.spatial.distance import pdist, squareform

from riskgraph.labels.exceptions import ClusteringError

logger = logging.getLogger(__name__)

RANK_TOL = 1e-10


@dataclass(frozen=True)
class KpcaProjection:
    """Projected points and the share of kernel variance they keep.

    Attributes:
        points: n×m projection
        eigenvalues: Retained eigenvalues of the centred kernel, descending
        retained_mass: Retained eigenvalues over the total positive mass
        gamma: RBF bandwidth used
    """

    points: npt.NDArray[np.float64]
    eigenvalues: npt.NDArray[np.float64]
    retained_mass: float
    gamma: float


def median_gamma(points: npt.NDArray[np.float64]) -> float:
    """Bandwidth 1 / (2 median²) of the pairwise distances; 1.0 when degenerate."""
    distances = pdist(points)
    positive = distances[distances > 0]
    if positive.size == 0:
        return 1.0
    median = float(np.median(positive))
    return 1.0 / (2.0 * median * median)


def rbf_kernel(
    points: npt.NDArray[np.float64], gamma: float
) -> npt.NDArray[np.float64]:
    distances = squareform(pdist(points, "sqeuclidean"))
    kernel: npt.NDArray[np.float64] = np.exp(-gamma * distances)
    return kernel


def center_kernel(kernel: npt.NDArray[np.float64]) -> npt.NDArray[np.float64]:
    """Double-centre a kernel matrix so every row and column sums to zero."""
    n = kernel.shape[0]
    ones = np.full((n, n), 1.0 / n)
    centered = kernel - ones @ kernel - kernel @ ones + ones @ kernel @ ones
    result: npt.NDArray[np.float64] = (centered + centered.T) / 2.0
    return result


def kpca_project(
    points: npt.ArrayLike, gamma: float | None = None, m: int = 2
) -> KpcaProjection:
    """Project points onto the leading kernel principal components.

    Each component is the centred-kernel eigenvector scaled by the inverse
    square root of its eigenvalue, so a training point's coordinate is
    ``sqrt(lambda) * v``.

    Args:
        points: n×d matrix with n >= 2
        gamma: RBF bandwidth; median heuristic when None
        m: Number of components

    Returns:
        KpcaProjection with at most ``m`` columns. When the centred kernel has
        lower rank, the columns are truncated to the rank with a warning; a rank
        0 kernel yields a single zero column.

    Raises:
        ClusteringError: If fewer than two points are given or m < 1
    """
    x = np.asarray(points, dtype=np.float64)
    if x.ndim == 1:
        x = x.reshape(-1, 1)
    if x.shape[0] < 2:
        raise ClusteringError(f"Kernel PCA needs at least 2 points, got {x.shape[0]}.")
    if m < 1:
        raise ClusteringError(f"Kernel PCA needs m >= 1 components, got {m}.")
    bandwidth = median_gamma(x) if gamma is None else gamma

    centered = center_kernel(rbf_kernel(x, bandwidth))
    eigenvalues, eigenvectors = eigh(centered)
    order = np.argsort(eigenvalues)[::-1]
    eigenvalues, eigenvectors = eigenvalues[order], eigenvectors[:, order]
    total = float(eigenvalues[eigenvalues > 0].sum())
    threshold = RANK_TOL * max(float(eigenvalues[0]), 0.0)
    rank = int(np.sum(eigenvalues > max(threshold, 1e-12)))

    if rank == 0:
        logger.warning("Centred kernel has rank 0; projection is all zeros")
        return KpcaProjection(
            points=np.zeros((x.shape[0], 1)),
            eigenvalues=np.zeros(0),
            retained_mass=0.0,
            gamma=bandwidth,
        )
    if m > rank:
        logger.warning("Requested %d components but kernel rank is %d", m, rank)
        m = rank
    kept = eigenvalues[:m]
    projected = eigenvectors[:, :m] * np.sqrt(kept)
    return KpcaProjection(
        points=projected,
        eigenvalues=kept,
        retained_mass=float(kept.sum()) / total if total > 0 else 0.0,
        gamma=bandwidth,
    )
