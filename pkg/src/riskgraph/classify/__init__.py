"""Support vector machine training and cross-validated evaluation.

This module trains one-vs-one SVMs on precomputed graph kernels and on
normalised lane-change features, and reports stratified cross-validation
results as confusion matrices.
"""

from __future__ import annotations

from riskgraph.classify.evaluation import (
    cross_validate,
    cross_validate_gram,
    kernel_fit_predict,
    learning_curve,
    stratified_folds,
    vrm_classifier_path,
)
from riskgraph.classify.exceptions import (
    ClassifyError,
    FoldError,
    PredictionError,
    TrainingError,
)
from riskgraph.classify.svm import (
    DualSolution,
    decision_values,
    level_array,
    predict,
    predict_many,
    solve_dual,
    train_svm,
)
from riskgraph.classify.svm_models import (
    BinaryModel,
    ConfusionMatrix,
    EvaluationReport,
    TrainedModel,
)

__all__ = [
    "BinaryModel",
    "ClassifyError",
    "ConfusionMatrix",
    "DualSolution",
    "EvaluationReport",
    "FoldError",
    "PredictionError",
    "TrainedModel",
    "TrainingError",
    "cross_validate",
    "cross_validate_gram",
    "decision_values",
    "kernel_fit_predict",
    "learning_curve",
    "level_array",
    "predict",
    "predict_many",
    "solve_dual",
    "stratified_folds",
    "train_svm",
    "vrm_classifier_path",
]
