"""Support vector machines on precomputed kernels.

Each binary problem is solved in the dual with sequential minimal
optimisation, selecting the working pair by maximal violation and second-order
gain. Multiclass problems are split one-vs-one and decided by majority vote.
"""

from __future__ import annotations

import logging
from collections.abc import Mapping, Sequence
from dataclasses import dataclass
from itertools import combinations
from typing import Any

import numpy as np
import numpy.typing as npt

from riskgraph.classify.exceptions import PredictionError, TrainingError
from riskgraph.classify.svm_models import BinaryModel, TrainedModel
from riskgraph.kernels.kernel_models import KernelMatrix, check_psd
from riskgraph.labels.label_models import RiskLabelSet

logger = logging.getLogger(__name__)

DEFAULT_TOL = 1e-3
TAU = 1e-12


@dataclass(frozen=True)
class DualSolution:
    """Solution of one binary dual problem."""

    alpha: npt.NDArray[np.float64]
    rho: float
    iterations: int
    kkt_gap: float
    objective: float
    converged: bool


def _rho(
    y: npt.NDArray[np.float64],
    gradient: npt.NDArray[np.float64],
    alpha: npt.NDArray[np.float64],
    upper: npt.NDArray[np.float64],
) -> float:
    y_grad = y * gradient
    at_upper = alpha >= upper
    at_lower = alpha <= 0.0
    free = ~at_upper & ~at_lower
    if np.any(free):
        return float(y_grad[free].mean())
    ub, lb = np.inf, -np.inf
    for t in range(y.shape[0]):
        bounded_up = (at_upper[t] and y[t] < 0) or (at_lower[t] and y[t] > 0)
        if bounded_up:
            ub = min(ub, y_grad[t])
        else:
            lb = max(lb, y_grad[t])
    return float((ub + lb) / 2.0)


def solve_dual(
    kernel: npt.NDArray[np.float64],
    y: npt.NDArray[np.float64],
    upper: npt.NDArray[np.float64],
    tol: float = DEFAULT_TOL,
    max_iterations: int | None = None,
) -> DualSolution:
    """Solve min ½ αᵀQα − Σα subject to yᵀα = 0 and 0 <= α <= upper.

    Args:
        kernel: n×n kernel block
        y: Labels in {-1, +1}
        upper: Per-sample box bound
        tol: Stopping tolerance on the maximal KKT violation
        max_iterations: Iteration cap; ``max(10**5, 100 n)`` by default

    Returns:
        DualSolution; ``converged`` is False when the cap was reached
    """
    n = y.shape[0]
    q = (y[:, None] * y[None, :]) * kernel
    q_diag = np.diag(q).copy()
    alpha = np.zeros(n)
    gradient = -np.ones(n)
    cap = max_iterations or max(100_000, 100 * n)
    iterations = 0
    gap = np.inf

    while iterations < cap:
        y_grad = -y * gradient
        in_up = ((y > 0) & (alpha < upper)) | ((y < 0) & (alpha > 0))
        in_low = ((y > 0) & (alpha > 0)) | ((y < 0) & (alpha < upper))
        if not np.any(in_up) or not np.any(in_low):
            gap = 0.0
            break
        candidates = np.where(in_up, y_grad, -np.inf)
        i = int(np.argmax(candidates))
        g_max = candidates[i]
        g_min = float(np.min(np.where(in_low, y_grad, np.inf)))
        gap = g_max - g_min
        if gap <= tol:
            break

        # Second-order choice of j among the violating lower-set samples.
        b = g_max - y_grad
        a = q_diag[i] + q_diag - 2.0 * y[i] * y * q[i]
        a = np.where(a > 0, a, TAU)
        gain = np.where(in_low & (b > 0), -(b * b) / a, np.inf)
        j = int(np.argmin(gain))
        iterations += 1

        old_i, old_j = alpha[i], alpha[j]
        c_i, c_j = upper[i], upper[j]
        if y[i] != y[j]:
            quad = q_diag[i] + q_diag[j] + 2.0 * q[i, j]
            quad = quad if quad > 0 else TAU
            delta = (-gradient[i] - gradient[j]) / quad
            diff = alpha[i] - alpha[j]
            alpha[i] += delta
            alpha[j] += delta
            if diff > 0:
                if alpha[j] < 0:
                    alpha[j] = 0.0
                    alpha[i] = diff
            elif alpha[i] < 0:
                alpha[i] = 0.0
                alpha[j] = -diff
            if diff > c_i - c_j:
                if alpha[i] > c_i:
                    alpha[i] = c_i
                    alpha[j] = c_i - diff
            elif alpha[j] > c_j:
                alpha[j] = c_j
                alpha[i] = c_j + diff
        else:
            quad = q_diag[i] + q_diag[j] - 2.0 * q[i, j]
            quad = quad if quad > 0 else TAU
            delta = (gradient[i] - gradient[j]) / quad
            total = alpha[i] + alpha[j]
            alpha[i] -= delta
            alpha[j] += delta
            if total > c_i:
                if alpha[i] > c_i:
                    alpha[i] = c_i
                    alpha[j] = total - c_i
            elif alpha[j] < 0:
                alpha[j] = 0.0
                alpha[i] = total
            if total > c_j:
                if alpha[j] > c_j:
                    alpha[j] = c_j
                    alpha[i] = total - c_j
            elif alpha[i] < 0:
                alpha[i] = 0.0
                alpha[j] = total

        gradient += q[:, i] * (alpha[i] - old_i) + q[:, j] * (alpha[j] - old_j)

    converged = gap <= tol
    if not converged:
        logger.warning(
            "SMO stopped at the iteration cap %d with KKT gap %.3e", cap, gap
        )
    objective = 0.5 * float(np.dot(alpha, gradient - 1.0))
    return DualSolution(
        alpha=alpha,
        rho=_rho(y, gradient, alpha, upper),
        iterations=iterations,
        kkt_gap=float(gap),
        objective=objective,
        converged=converged,
    )


def _kernel_values(
    gram: KernelMatrix | npt.ArrayLike, check: bool
) -> npt.NDArray[np.float64]:
    if isinstance(gram, KernelMatrix):
        return gram.values
    values = np.asarray(gram, dtype=np.float64)
    if values.ndim != 2 or values.shape[0] != values.shape[1]:
        raise TrainingError(
            f"Training kernel must be square, got shape {values.shape}."
        )
    if check:
        if np.max(np.abs(values - values.T)) > 1e-12:
            raise TrainingError("Training kernel is not symmetric.")
        check_psd(values)
    return values


def level_array(
    labels: RiskLabelSet | Sequence[int] | npt.ArrayLike,
) -> npt.NDArray[np.int64]:
    """Class labels as an integer array."""
    if isinstance(labels, RiskLabelSet):
        return np.asarray(labels.levels, dtype=np.int64)
    return np.asarray(labels, dtype=np.int64)


def train_svm(
    gram: KernelMatrix | npt.ArrayLike,
    labels: RiskLabelSet | Sequence[int],
    C: float = 1.0,
    *,
    tol: float = DEFAULT_TOL,
    class_weights: Mapping[int, float] | None = None,
    check: bool = True,
    kernel: Mapping[str, Any] | None = None,
) -> TrainedModel:
    """Train a one-vs-one SVM on a precomputed kernel.

    Args:
        gram: Training kernel, n×n
        labels: Risk labels or the class of every training sample
        C: Regularisation constant
        tol: Stopping tolerance of every binary solver
        class_weights: Multiplier of C per class; 1 for unlisted classes
        check: Validate symmetry and semi-definiteness of a raw kernel array
        kernel: Kernel description stored with the model

    Returns:
        TrainedModel with one binary classifier per class pair

    Raises:
        TrainingError: If fewer than two classes are present or shapes disagree
        KernelNotPSDError: If a raw kernel fails the semi-definiteness check
    """
    values = _kernel_values(gram, check)
    targets = np.asarray(level_array(labels), dtype=np.int64)
    if targets.shape[0] != values.shape[0]:
        raise TrainingError(
            f"{targets.shape[0]} labels for a {values.shape[0]}-sample kernel."
        )
    if (
        isinstance(gram, KernelMatrix)
        and isinstance(labels, RiskLabelSet)
        and gram.refs
        and labels.scene_refs != gram.refs
    ):
        mismatched = sum(a != b for a, b in zip(gram.refs, labels.scene_refs))
        raise TrainingError(
            f"Kernel rows and risk labels refer to different scenes "
            f"({mismatched} of {len(gram.refs)} positions differ).\n"
            f"Suggestion: rebuild the Gram matrix and the labels from the same "
            f"scene file"
        )
    classes = tuple(int(c) for c in np.unique(targets))
    if len(classes) < 2:
        raise TrainingError(
            f"Training needs at least two classes, labels hold only {classes}.\n"
            f"Suggestion: extract more scenes or lower the cluster count"
        )
    if C <= 0:
        raise TrainingError(f"C must be positive, got {C}.")
    weights = dict(class_weights or {})
    kernel_info: Mapping[str, Any] = kernel or (
        gram.config.to_dict() if isinstance(gram, KernelMatrix) else {}
    )

    pairs: list[BinaryModel] = []
    for positive, negative in combinations(classes, 2):
        index = np.flatnonzero((targets == positive) | (targets == negative))
        y = np.where(targets[index] == positive, 1.0, -1.0)
        upper = np.where(
            y > 0, C * weights.get(positive, 1.0), C * weights.get(negative, 1.0)
        )
        solution = solve_dual(values[np.ix_(index, index)], y, upper, tol)
        alpha = np.clip(solution.alpha, 0.0, upper)
        support = np.flatnonzero(alpha > 0)
        pairs.append(
            BinaryModel(
                positive=positive,
                negative=negative,
                support=tuple(int(index[s]) for s in support),
                coef=tuple(float(alpha[s] * y[s]) for s in support),
                bias=-solution.rho,
                upper=tuple(float(upper[s]) for s in support),
                iterations=solution.iterations,
                kkt_gap=solution.kkt_gap,
                objective=solution.objective,
            )
        )
        logger.debug(
            "Pair %d/%d: %d support vectors, %d iterations",
            positive,
            negative,
            support.size,
            solution.iterations,
        )
    return TrainedModel(
        classes=classes,
        pairs=tuple(pairs),
        C=C,
        train_size=values.shape[0],
        class_weights=weights,
        kernel=dict(kernel_info),
    )


def decision_values(
    model: TrainedModel, kernel_row: Sequence[float] | npt.ArrayLike
) -> list[float]:
    """Decision value of every class pair for one sample."""
    row = np.asarray(kernel_row, dtype=np.float64)
    if row.shape != (model.train_size,):
        raise PredictionError(
            f"Kernel row has {row.size} entries but the model was trained on "
            f"{model.train_size} samples."
        )
    return [pair.decision(row) for pair in model.pairs]


def predict(model: TrainedModel, kernel_row: Sequence[float] | npt.ArrayLike) -> int:
    """Predicted class of one sample from its similarities to the training set.

    Raises:
        PredictionError: If the row length differs from the training size
    """
    votes = {c: 0 for c in model.classes}
    for pair, value in zip(model.pairs, decision_values(model, kernel_row)):
        votes[pair.positive if value > 0 else pair.negative] += 1
    best = max(votes.values())
    return min(c for c, v in votes.items() if v == best)


def predict_many(
    model: TrainedModel, kernel_rows: npt.ArrayLike
) -> npt.NDArray[np.int64]:
    """Predicted classes of many samples; one kernel row per sample."""
    rows = np.asarray(kernel_rows, dtype=np.float64)
    if rows.ndim != 2:
        raise PredictionError(
            f"Kernel rows must form a matrix, got shape {rows.shape}."
        )
    return np.array([predict(model, row) for row in rows], dtype=np.int64)
