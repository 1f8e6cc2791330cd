"""Data models for graph kernels and Gram matrices."""

from __future__ import annotations

from collections.abc import Mapping
from dataclasses import dataclass, field
from enum import Enum
from typing import Any

import numpy as np
import numpy.typing as npt
from scipy.linalg import eigvalsh

from riskgraph.kernels.exceptions import (
    KernelConfigError,
    KernelError,
    KernelNotPSDError,
)

SYMMETRY_TOL = 1e-12
PSD_TOL = 1e-8


class KernelName(Enum):
    SPGK = "spgk"
    NHGK = "nhgk"
    LINEAR = "linear"


@dataclass(frozen=True)
class KernelConfig:
    """Kernel name and parameters.

    Attributes:
        name: Kernel family
        h: Neighbourhood-hash iterations
        bits: Bit width of the neighbourhood-hash labels
        seed: Seed of the initial label hash
        normalize: Scale shortest-path kernel values to a unit diagonal
    """

    name: KernelName = KernelName.SPGK
    h: int = 3
    bits: int = 16
    seed: int = 7
    normalize: bool = True

    def __post_init__(self) -> None:
        if self.h < 1:
            raise KernelConfigError(f"NHGK needs h >= 1 iterations, got {self.h}.")
        if not 8 <= self.bits <= 64:
            raise KernelConfigError(
                f"NHGK bit width must lie in [8, 64], got {self.bits}."
            )

    @property
    def unit_diagonal(self) -> bool:
        return self.name is KernelName.NHGK or (
            self.name is KernelName.SPGK and self.normalize
        )

    def to_dict(self) -> dict[str, Any]:
        return {
            "name": self.name.value,
            "h": self.h,
            "bits": self.bits,
            "seed": self.seed,
            "normalize": self.normalize,
        }

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> KernelConfig:
        try:
            return cls(
                name=KernelName(data.get("name", "spgk")),
                h=int(data.get("h", 3)),
                bits=int(data.get("bits", 16)),
                seed=int(data.get("seed", 7)),
                normalize=bool(data.get("normalize", True)),
            )
        except ValueError as e:
            raise KernelConfigError(f"Invalid kernel configuration: {e}") from e


@dataclass(frozen=True)
class ShortestPathGraph:
    """All-pairs hop distances of a scene graph.

    Attributes:
        labels: Cell label of every node
        entries: (u, v, d) for every reachable pair u < v at distance d >= 1
    """

    labels: tuple[int, ...]
    entries: tuple[tuple[int, int, int], ...]

    def signature(self) -> dict[tuple[int, int, int], int]:
        """Counts of (distance, smaller label, larger label) over all entries."""
        counts: dict[tuple[int, int, int], int] = {}
        for u, v, d in self.entries:
            a, b = self.labels[u], self.labels[v]
            key = (d, min(a, b), max(a, b))
            counts[key] = counts.get(key, 0) + 1
        return counts


def check_psd(values: npt.NDArray[np.float64]) -> tuple[float, float]:
    """Extreme eigenvalues of a symmetric matrix, checked for semi-definiteness.

    Returns:
        (minimum eigenvalue, maximum eigenvalue)

    Raises:
        KernelNotPSDError: If the minimum eigenvalue is below
            ``-1e-8 × maximum eigenvalue``
    """
    eigenvalues = eigvalsh(values)
    lowest, highest = float(eigenvalues[0]), float(eigenvalues[-1])
    if lowest < -PSD_TOL * max(highest, 0.0):
        raise KernelNotPSDError(
            f"Gram matrix is not positive semi-definite: minimum eigenvalue "
            f"{lowest:.3e} against maximum {highest:.3e}.\n"
            f"Suggestions:\n"
            f"  - Rebuild the matrix instead of editing it by hand\n"
            f"  - Check that every entry comes from the same kernel configuration",
            lowest,
            highest,
        )
    return lowest, highest


@dataclass(frozen=True, eq=False)
class KernelMatrix:
    """Symmetric, positive semi-definite Gram matrix.

    Construction validates symmetry, the unit diagonal of normalised kernels and
    positive semi-definiteness. A shortest-path kernel row of an edgeless graph
    is all zeros, diagonal included; such rows are counted in ``degenerate``.

    Attributes:
        values: n×n kernel values
        config: Kernel that produced the values
        refs: Scene reference of every row
        degenerate: Number of all-zero rows
        min_eigenvalue: Smallest eigenvalue, filled by validation
        max_eigenvalue: Largest eigenvalue, filled by validation
    """

    values: npt.NDArray[np.float64]
    config: KernelConfig
    refs: tuple[str, ...] = ()
    degenerate: int = 0
    min_eigenvalue: float = field(default=0.0, init=False)
    max_eigenvalue: float = field(default=0.0, init=False)

    def __post_init__(self) -> None:
        values = self.values
        if values.ndim != 2 or values.shape[0] != values.shape[1]:
            raise KernelError(f"Gram matrix must be square, got shape {values.shape}.")
        if self.refs and len(self.refs) != values.shape[0]:
            raise KernelError(
                f"{len(self.refs)} references for a {values.shape[0]}-row matrix."
            )
        if not np.all(np.isfinite(values)):
            raise KernelError("Gram matrix contains non-finite values.")
        asymmetry = float(np.max(np.abs(values - values.T))) if values.size else 0.0
        if asymmetry > SYMMETRY_TOL:
            raise KernelError(
                f"Gram matrix is not symmetric (max gap {asymmetry:.3e})."
            )
        if self.config.unit_diagonal:
            diagonal = np.diag(values)
            zero_rows = np.all(values == 0.0, axis=1)
            off = ~np.isclose(diagonal, 1.0, rtol=0.0, atol=1e-12) & ~zero_rows
            if np.any(off):
                raise KernelError(
                    f"Normalised Gram matrix has {int(off.sum())} diagonal entries "
                    f"different from 1."
                )
        lowest, highest = check_psd(values) if values.size else (0.0, 0.0)
        object.__setattr__(self, "min_eigenvalue", lowest)
        object.__setattr__(self, "max_eigenvalue", highest)

    @property
    def n(self) -> int:
        return int(self.values.shape[0])

    def submatrix(
        self, rows: npt.ArrayLike, columns: npt.ArrayLike
    ) -> npt.NDArray[np.float64]:
        """Block of kernel values between two index sets."""
        block: npt.NDArray[np.float64] = self.values[np.ix_(rows, columns)]
        return block
