"""Stratified cross-validation of precomputed-kernel classifiers."""

from __future__ import annotations

import logging
from collections.abc import Callable, Mapping, Sequence

import numpy as np
import numpy.typing as npt
import pandas as pd
from sklearn.model_selection import StratifiedKFold

from riskgraph.classify.exceptions import FoldError
from riskgraph.classify.svm import DEFAULT_TOL, level_array, predict_many, train_svm
from riskgraph.classify.svm_models import ConfusionMatrix, EvaluationReport
from riskgraph.kernels.kernel_models import KernelConfig, KernelMatrix, KernelName
from riskgraph.labels.label_models import RiskLabelSet

logger = logging.getLogger(__name__)

DEFAULT_FOLDS = 5
DEFAULT_FRACTIONS = (0.2, 0.4, 0.6, 0.8, 1.0)

FitPredict = Callable[
    [npt.NDArray[np.int64], npt.NDArray[np.int64]], npt.NDArray[np.int64]
]
Split = tuple[npt.NDArray[np.int64], npt.NDArray[np.int64]]


def stratified_folds(
    labels: RiskLabelSet | Sequence[int], folds: int = DEFAULT_FOLDS, seed: int = 0
) -> list[Split]:
    """Seeded stratified (train, test) index splits.

    Raises:
        FoldError: If folds < 2 or a class has fewer members than folds
    """
    targets = level_array(labels)
    if folds < 2:
        raise FoldError(f"Cross-validation needs at least 2 folds, got {folds}.")
    classes, counts = np.unique(targets, return_counts=True)
    for cls, count in zip(classes, counts):
        if count < folds:
            raise FoldError(
                f"Class {int(cls)} has {int(count)} members, fewer than the "
                f"{folds} folds.\n"
                f"Suggestions:\n"
                f"  - Lower the number of folds\n"
                f"  - Extract more scenes or choose a smaller cluster count"
            )
    splitter = StratifiedKFold(n_splits=folds, shuffle=True, random_state=seed)
    return [
        (np.asarray(train, dtype=np.int64), np.asarray(test, dtype=np.int64))
        for train, test in splitter.split(np.zeros(targets.shape[0]), targets)
    ]


def cross_validate(
    labels: RiskLabelSet | Sequence[int],
    fit_predict: FitPredict,
    folds: int = DEFAULT_FOLDS,
    seed: int = 0,
    *,
    name: str = "",
    C: float = 1.0,
) -> EvaluationReport:
    """Test every sample exactly once across stratified folds.

    Args:
        labels: Class of every sample
        fit_predict: Trains on the first index array and returns predictions
            for the second
        folds: Number of folds
        seed: Fold assignment seed
        name: Configuration name recorded in the report
        C: Regularisation constant recorded in the report

    Returns:
        EvaluationReport with the aggregated confusion matrix and fold accuracies
    """
    targets = level_array(labels)
    classes = [int(c) for c in np.unique(targets)]
    outputs = np.zeros_like(targets)
    accuracies: list[float] = []
    for number, (train, test) in enumerate(stratified_folds(targets, folds, seed), 1):
        predicted = fit_predict(train, test)
        outputs[test] = predicted
        accuracy = float(np.mean(predicted == targets[test]))
        accuracies.append(accuracy)
        logger.debug(
            "Fold %d/%d: train %d, test %d, accuracy %.4f",
            number,
            folds,
            train.size,
            test.size,
            accuracy,
        )
    confusion = ConfusionMatrix.from_predictions(targets, outputs, classes)
    logger.info(
        "%s cross-validation: accuracy %.4f over %d samples",
        name or "Classifier",
        confusion.accuracy,
        confusion.total,
    )
    return EvaluationReport(
        name=name,
        confusion=confusion,
        fold_accuracies=tuple(accuracies),
        folds=folds,
        seed=seed,
        C=C,
    )


def kernel_fit_predict(
    gram: KernelMatrix,
    labels: RiskLabelSet | Sequence[int],
    C: float = 1.0,
    *,
    tol: float = DEFAULT_TOL,
    class_weights: Mapping[int, float] | None = None,
) -> FitPredict:
    """Fit-and-predict callback that slices one precomputed Gram matrix per fold."""
    targets = level_array(labels)
    kernel = gram.config.to_dict()

    def run(
        train: npt.NDArray[np.int64], test: npt.NDArray[np.int64]
    ) -> npt.NDArray[np.int64]:
        model = train_svm(
            gram.submatrix(train, train),
            targets[train],
            C,
            tol=tol,
            class_weights=class_weights,
            check=False,
            kernel=kernel,
        )
        return predict_many(model, gram.submatrix(test, train))

    return run


def cross_validate_gram(
    gram: KernelMatrix,
    labels: RiskLabelSet | Sequence[int],
    C: float = 1.0,
    folds: int = DEFAULT_FOLDS,
    seed: int = 0,
    *,
    name: str | None = None,
    tol: float = DEFAULT_TOL,
) -> EvaluationReport:
    """Cross-validate an SVM on a Gram matrix computed once for all samples."""
    targets = level_array(labels)
    if targets.shape[0] != gram.n:
        raise FoldError(
            f"{targets.shape[0]} labels for a {gram.n}-sample Gram matrix."
        )
    if (
        isinstance(labels, RiskLabelSet)
        and gram.refs
        and labels.scene_refs != gram.refs
    ):
        raise FoldError(
            "Gram matrix rows and risk labels refer to different scenes.\n"
            "Suggestion: rebuild both from the same scene file"
        )
    return cross_validate(
        targets,
        kernel_fit_predict(gram, targets, C, tol=tol),
        folds,
        seed,
        name=name or gram.config.name.value,
        C=C,
    )


def scale_by_reference(
    points: npt.NDArray[np.float64], reference: npt.NDArray[np.float64]
) -> npt.NDArray[np.float64]:
    """Map columns onto [-1, 1] using the extrema of ``reference``.

    Values of ``points`` outside the reference range fall outside [-1, 1]. A
    column that is constant in the reference becomes zeros.
    """
    low = reference.min(axis=0)
    high = reference.max(axis=0)
    span = high - low
    varying = span > 0
    scaled = np.zeros_like(points)
    scaled[:, varying] = (
        2.0 * (points[:, varying] - 0.5 * (high + low)[varying]) / span[varying]
    )
    return scaled


def vrm_classifier_path(
    features: npt.ArrayLike,
    labels: RiskLabelSet | Sequence[int],
    C: float = 1.0,
    folds: int = DEFAULT_FOLDS,
    seed: int = 0,
    *,
    refs: Sequence[str] = (),
) -> EvaluationReport:
    """Cross-validate a linear SVM on lane-change feature vectors.

    Inside every fold the feature columns are scaled onto [-1, 1] by the
    extrema of the training rows; test rows reuse that scaling.

    Raises:
        FoldError: If features and labels disagree in count or scenes
    """
    x = np.asarray(features, dtype=np.float64)
    targets = level_array(labels)
    if x.ndim != 2 or x.shape[0] != targets.shape[0]:
        raise FoldError(
            f"Feature matrix of shape {x.shape} does not match "
            f"{targets.shape[0]} labels."
        )
    if isinstance(labels, RiskLabelSet) and refs and labels.scene_refs != tuple(refs):
        raise FoldError(
            "Lane-change features and risk labels refer to different scenes.\n"
            "Suggestion: rebuild both from the same scene file"
        )
    kernel = KernelConfig(name=KernelName.LINEAR).to_dict()

    def run(
        train: npt.NDArray[np.int64], test: npt.NDArray[np.int64]
    ) -> npt.NDArray[np.int64]:
        reference = x[train]
        scaled_train = scale_by_reference(reference, reference)
        scaled_test = scale_by_reference(x[test], reference)
        model = train_svm(
            scaled_train @ scaled_train.T,
            targets[train],
            C,
            check=False,
            kernel=kernel,
        )
        return predict_many(model, scaled_test @ scaled_train.T)

    return cross_validate(targets, run, folds, seed, name="linear", C=C)


def learning_curve(
    gram: KernelMatrix,
    labels: RiskLabelSet | Sequence[int],
    fractions: Sequence[float] = DEFAULT_FRACTIONS,
    C: float = 1.0,
    folds: int = DEFAULT_FOLDS,
    seed: int = 0,
) -> pd.DataFrame:
    """Test accuracy as the training share of every fold grows.

    For each fold the training indices are shuffled once with the seed and
    truncated to each fraction; the full test fold is always scored. Subsets
    holding a single class are skipped with a warning.

    Returns:
        DataFrame with columns fraction, train_size, accuracy, folds_scored
    """
    targets = level_array(labels)
    splits = stratified_folds(targets, folds, seed)
    rng = np.random.default_rng(seed)
    orders = [rng.permutation(train) for train, _ in splits]
    rows = []
    for fraction in fractions:
        if not 0.0 < fraction <= 1.0:
            raise FoldError(f"Training fraction must be in (0, 1], got {fraction}.")
        correct = 0
        scored = 0
        sizes = []
        used = 0
        for (_, test), order in zip(splits, orders):
            subset = np.sort(order[: max(2, int(round(fraction * order.size)))])
            if np.unique(targets[subset]).size < 2:
                logger.warning(
                    "Skipping fraction %.2f of a fold: a single class in %d samples",
                    fraction,
                    subset.size,
                )
                continue
            predicted = kernel_fit_predict(gram, targets, C)(subset, test)
            correct += int(np.sum(predicted == targets[test]))
            scored += test.size
            sizes.append(subset.size)
            used += 1
        rows.append(
            {
                "fraction": float(fraction),
                "train_size": float(np.mean(sizes)) if sizes else 0.0,
                "accuracy": correct / scored if scored else float("nan"),
                "folds_scored": used,
            }
        )
    return pd.DataFrame(
        rows, columns=["fraction", "train_size", "accuracy", "folds_scored"]
    )
