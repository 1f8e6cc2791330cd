"""Data models for trained classifiers and their evaluation."""

from __future__ import annotations

from collections.abc import Mapping, Sequence
from dataclasses import dataclass, field
from typing import Any

import numpy as np
import numpy.typing as npt
import pandas as pd
from sklearn.metrics import confusion_matrix

from riskgraph.classify.exceptions import ClassifyError, TrainingError

DUAL_TOL = 1e-6


@dataclass(frozen=True)
class BinaryModel:
    """One class-pair classifier of a one-vs-one model.

    The decision value of a sample x is ``sum(coef * K(support, x)) + bias``;
    a positive value votes for ``positive``.

    Attributes:
        positive: Class voted for by a positive decision value
        negative: Class voted for otherwise
        support: Training-set indices of the support vectors
        coef: alpha·y of every support vector
        bias: Intercept b
        upper: Box bound C of every support vector
        iterations: Solver iterations used
        kkt_gap: Maximal KKT violation at termination
        objective: Dual objective value at termination
    """

    positive: int
    negative: int
    support: tuple[int, ...]
    coef: tuple[float, ...]
    bias: float
    upper: tuple[float, ...] = ()
    iterations: int = 0
    kkt_gap: float = 0.0
    objective: float = 0.0

    def __post_init__(self) -> None:
        if not self.support:
            raise TrainingError(
                f"Classifier {self.positive} vs {self.negative} has no support vectors."
            )
        if len(self.support) != len(self.coef):
            raise TrainingError("Support indices and coefficients differ in length.")
        if abs(sum(self.coef)) > DUAL_TOL:
            raise TrainingError(
                f"Classifier {self.positive} vs {self.negative} breaks the equality "
                f"constraint: sum(alpha·y) = {sum(self.coef):.3e}."
            )
        if self.upper:
            alphas = np.abs(self.coef)
            if np.any(alphas > np.asarray(self.upper) * (1 + 1e-12) + DUAL_TOL):
                raise TrainingError(
                    f"Classifier {self.positive} vs {self.negative} has alpha above C."
                )

    def decision(self, kernel_row: npt.NDArray[np.float64]) -> float:
        values = kernel_row[list(self.support)]
        return float(np.dot(np.asarray(self.coef), values) + self.bias)

    def to_dict(self) -> dict[str, Any]:
        return {
            "positive": self.positive,
            "negative": self.negative,
            "support": list(self.support),
            "coef": list(self.coef),
            "bias": self.bias,
            "upper": list(self.upper),
            "iterations": self.iterations,
            "kkt_gap": self.kkt_gap,
            "objective": self.objective,
        }

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> BinaryModel:
        return cls(
            positive=int(data["positive"]),
            negative=int(data["negative"]),
            support=tuple(int(i) for i in data["support"]),
            coef=tuple(float(c) for c in data["coef"]),
            bias=float(data["bias"]),
            upper=tuple(float(u) for u in data.get("upper", ())),
            iterations=int(data.get("iterations", 0)),
            kkt_gap=float(data.get("kkt_gap", 0.0)),
            objective=float(data.get("objective", 0.0)),
        )


@dataclass(frozen=True)
class TrainedModel:
    """One-vs-one support vector machine over a precomputed kernel.

    Attributes:
        classes: Sorted class labels
        pairs: Binary classifiers for every class pair (a, b) with a < b
        C: Regularisation constant
        train_size: Number of training samples the kernel rows refer to
        class_weights: Per-class multiplier of C
        kernel: Description of the kernel the model was trained on
    """

    classes: tuple[int, ...]
    pairs: tuple[BinaryModel, ...]
    C: float
    train_size: int
    class_weights: Mapping[int, float] = field(default_factory=dict)
    kernel: Mapping[str, Any] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if len(self.classes) < 2:
            raise TrainingError("A model needs at least two classes.")
        expected = len(self.classes) * (len(self.classes) - 1) // 2
        if len(self.pairs) != expected:
            raise TrainingError(
                f"Expected {expected} class-pair classifiers, got {len(self.pairs)}."
            )
        for pair in self.pairs:
            if any(not 0 <= i < self.train_size for i in pair.support):
                raise TrainingError("Support index outside the training set.")

    def to_dict(self) -> dict[str, Any]:
        return {
            "classes": list(self.classes),
            "C": self.C,
            "train_size": self.train_size,
            "class_weights": {str(k): v for k, v in sorted(self.class_weights.items())},
            "kernel": dict(self.kernel),
            "pairs": [p.to_dict() for p in self.pairs],
        }

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> TrainedModel:
        return cls(
            classes=tuple(int(c) for c in data["classes"]),
            pairs=tuple(BinaryModel.from_dict(p) for p in data["pairs"]),
            C=float(data["C"]),
            train_size=int(data["train_size"]),
            class_weights={
                int(k): float(v) for k, v in data.get("class_weights", {}).items()
            },
            kernel=dict(data.get("kernel", {})),
        )


@dataclass(frozen=True)
class ConfusionMatrix:
    """Counts of target class (rows) against output class (columns)."""

    classes: tuple[int, ...]
    counts: tuple[tuple[int, ...], ...]

    def __post_init__(self) -> None:
        n = len(self.classes)
        if len(self.counts) != n or any(len(row) != n for row in self.counts):
            raise ClassifyError(f"Confusion counts must be {n}×{n}.")
        if any(c < 0 for row in self.counts for c in row):
            raise ClassifyError("Confusion counts must be non-negative.")

    @classmethod
    def from_predictions(
        cls, targets: Sequence[int], outputs: Sequence[int], classes: Sequence[int]
    ) -> ConfusionMatrix:
        matrix = confusion_matrix(list(targets), list(outputs), labels=list(classes))
        return cls(
            classes=tuple(int(c) for c in classes),
            counts=tuple(tuple(int(v) for v in row) for row in matrix),
        )

    @property
    def array(self) -> npt.NDArray[np.int64]:
        return np.array(self.counts, dtype=np.int64).reshape(
            len(self.classes), len(self.classes)
        )

    @property
    def total(self) -> int:
        return int(self.array.sum())

    @property
    def accuracy(self) -> float:
        total = self.total
        return float(np.trace(self.array)) / total if total else 0.0

    def recall(self) -> dict[int, float]:
        """Share of each target class predicted correctly."""
        array = self.array
        rows = array.sum(axis=1)
        return {
            c: float(array[i, i] / rows[i]) if rows[i] else 0.0
            for i, c in enumerate(self.classes)
        }

    def precision(self) -> dict[int, float]:
        """Share of each output class that is correct."""
        array = self.array
        columns = array.sum(axis=0)
        return {
            c: float(array[i, i] / columns[i]) if columns[i] else 0.0
            for i, c in enumerate(self.classes)
        }

    def cells(self) -> pd.DataFrame:
        """One row per (target, output) cell, for plotting."""
        array = self.array
        return pd.DataFrame(
            [
                {"target": t, "output": o, "count": int(array[i, j])}
                for i, t in enumerate(self.classes)
                for j, o in enumerate(self.classes)
            ],
            columns=["target", "output", "count"],
        )

    def to_dict(self) -> dict[str, Any]:
        return {
            "classes": list(self.classes),
            "counts": [list(row) for row in self.counts],
            "total": self.total,
            "accuracy": self.accuracy,
            "recall": {str(k): v for k, v in self.recall().items()},
            "precision": {str(k): v for k, v in self.precision().items()},
        }

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> ConfusionMatrix:
        return cls(
            classes=tuple(int(c) for c in data["classes"]),
            counts=tuple(tuple(int(v) for v in row) for row in data["counts"]),
        )


@dataclass(frozen=True)
class EvaluationReport:
    """Cross-validated evaluation of one classifier configuration.

    Attributes:
        name: Configuration name, e.g. "spgk", "nhgk" or "linear"
        confusion: Confusion matrix aggregated over all test folds
        fold_accuracies: Accuracy of every test fold
        folds: Number of folds
        seed: Fold assignment seed
        C: Regularisation constant
    """

    name: str
    confusion: ConfusionMatrix
    fold_accuracies: tuple[float, ...]
    folds: int
    seed: int
    C: float

    @property
    def mean_accuracy(self) -> float:
        return float(np.mean(self.fold_accuracies)) if self.fold_accuracies else 0.0

    def to_dict(self) -> dict[str, Any]:
        return {
            "name": self.name,
            "folds": self.folds,
            "seed": self.seed,
            "C": self.C,
            "overall_accuracy": self.confusion.accuracy,
            "mean_fold_accuracy": self.mean_accuracy,
            "fold_accuracies": list(self.fold_accuracies),
            "confusion": self.confusion.to_dict(),
        }

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> EvaluationReport:
        return cls(
            name=str(data["name"]),
            confusion=ConfusionMatrix.from_dict(data["confusion"]),
            fold_accuracies=tuple(float(a) for a in data["fold_accuracies"]),
            folds=int(data["folds"]),
            seed=int(data["seed"]),
            C=float(data["C"]),
        )
