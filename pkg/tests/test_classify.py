"""Tests for SVM training, prediction and cross-validation."""

from __future__ import annotations

import numpy as np
import pytest
from scipy.optimize import minimize

from riskgraph.classify import (
    BinaryModel,
    ClassifyError,
    ConfusionMatrix,
    EvaluationReport,
    FoldError,
    PredictionError,
    TrainedModel,
    TrainingError,
    cross_validate_gram,
    learning_curve,
    predict,
    predict_many,
    solve_dual,
    stratified_folds,
    train_svm,
    vrm_classifier_path,
)
from riskgraph.classify.evaluation import scale_by_reference
from riskgraph.kernels import linear_gram
from riskgraph.labels import RiskLabelSet

CENTRES = {1: (5.0, 0.0), 2: (-5.0, 0.0), 3: (0.0, 5.0)}


def _blobs(
    per_class: int,
    classes: tuple[int, ...] = (1, 2),
    seed: int = 0,
    spread: float = 0.3,
) -> tuple[np.ndarray, np.ndarray]:
    rng = np.random.default_rng(seed)
    points = np.concatenate(
        [rng.normal(CENTRES[c], spread, size=(per_class, 2)) for c in classes]
    )
    labels = np.repeat(np.array(classes), per_class)
    return points, labels


def _reference_objective(
    kernel: np.ndarray, y: np.ndarray, upper: np.ndarray
) -> float:
    """Dual optimum found by a general constrained solver."""
    q = np.outer(y, y) * kernel
    result = minimize(
        lambda a: 0.5 * a @ q @ a - a.sum(),
        np.zeros(y.size),
        jac=lambda a: q @ a - 1.0,
        bounds=[(0.0, float(u)) for u in upper],
        constraints=[{"type": "eq", "fun": lambda a: y @ a, "jac": lambda a: y}],
        method="SLSQP",
        options={"ftol": 1e-12, "maxiter": 500},
    )
    return float(result.fun)


class TestSolveDual:
    """Tests for the binary dual solver."""

    @pytest.mark.parametrize("seed", [0, 1, 2])
    def test_matches_reference_optimum(self, seed: int) -> None:
        """Test the dual objective equals a general solver's on small problems."""
        rng = np.random.default_rng(seed)
        x = rng.normal(size=(12, 3))
        y = np.where(rng.random(12) < 0.5, 1.0, -1.0)
        y[:2] = (1.0, -1.0)
        kernel = x @ x.T
        upper = np.full(12, 1.0)

        solution = solve_dual(kernel, y, upper, tol=1e-8)

        assert solution.converged
        assert solution.objective == pytest.approx(
            _reference_objective(kernel, y, upper), abs=1e-5
        )

    def test_feasible_solution(self) -> None:
        """Test the solution keeps the box and equality constraints."""
        points, labels = _blobs(20, spread=3.0, seed=4)
        y = np.where(labels == 1, 1.0, -1.0)
        upper = np.full(y.size, 0.5)

        solution = solve_dual(points @ points.T, y, upper)

        assert np.all(solution.alpha >= 0.0)
        assert np.all(solution.alpha <= 0.5 + 1e-12)
        assert float(y @ solution.alpha) == pytest.approx(0.0, abs=1e-9)
        assert solution.kkt_gap <= 1e-3

    def test_iteration_cap_only_warns(self) -> None:
        """Test reaching the iteration cap returns an unconverged solution."""
        points, labels = _blobs(20, spread=3.0, seed=5)
        y = np.where(labels == 1, 1.0, -1.0)

        solution = solve_dual(
            points @ points.T, y, np.full(y.size, 10.0), max_iterations=1
        )

        assert not solution.converged
        assert solution.iterations == 1


class TestTrainSvm:
    """Tests for one-vs-one training."""

    def test_separable_training_accuracy(self) -> None:
        """Test separable classes are fitted without training errors."""
        points, labels = _blobs(15, classes=(1, 2, 3))
        gram = linear_gram(points)

        model = train_svm(gram, labels, C=1e4)

        assert model.classes == (1, 2, 3)
        assert len(model.pairs) == 3
        np.testing.assert_array_equal(predict_many(model, gram.values), labels)

    def test_dual_feasibility_per_pair(self) -> None:
        """Test every pair keeps sum(alpha·y) = 0 and alpha within C."""
        points, labels = _blobs(15, classes=(1, 2, 3), spread=4.0, seed=3)

        model = train_svm(linear_gram(points), labels, C=0.7)

        for pair in model.pairs:
            assert sum(pair.coef) == pytest.approx(0.0, abs=1e-9)
            assert all(abs(c) <= 0.7 + 1e-12 for c in pair.coef)

    def test_class_weights_scale_bounds(self) -> None:
        """Test a class weight multiplies C for that class."""
        points, labels = _blobs(15, spread=4.0, seed=6)

        model = train_svm(linear_gram(points), labels, C=1.0, class_weights={2: 3.0})

        pair = model.pairs[0]
        assert set(pair.upper) <= {1.0, 3.0}

    def test_single_class(self) -> None:
        """Test labels with one class cannot be trained on."""
        with pytest.raises(TrainingError) as exc_info:
            train_svm(np.eye(3), [2, 2, 2])

        assert "at least two classes" in str(exc_info.value)

    def test_label_count_mismatch(self) -> None:
        """Test the labels must match the kernel size."""
        with pytest.raises(TrainingError):
            train_svm(np.eye(3), [1, 2])

    def test_non_positive_c(self) -> None:
        """Test C must be positive."""
        with pytest.raises(TrainingError):
            train_svm(np.eye(2), [1, 2], C=0.0)

    def test_risk_label_set_accepted(self) -> None:
        """Test risk labels can be passed directly."""
        points, labels = _blobs(5)
        label_set = RiskLabelSet(
            scene_refs=tuple(str(i) for i in range(10)),
            levels=tuple(int(v) for v in labels),
            k=1,
        )

        model = train_svm(linear_gram(points), label_set, C=10.0)

        assert model.classes == (1, 2)

    def test_model_dict_round_trip(self) -> None:
        """Test a trained model survives its dictionary form."""
        points, labels = _blobs(6, classes=(1, 2, 3))

        model = train_svm(linear_gram(points), labels)

        assert TrainedModel.from_dict(model.to_dict()) == model

    def test_scene_mismatch(self) -> None:
        """Test Gram rows and risk labels must refer to the same scenes."""
        points, labels = _blobs(5)
        gram = linear_gram(points, [f"s{i}" for i in range(10)])
        label_set = RiskLabelSet(
            scene_refs=tuple(f"t{i}" for i in range(10)),
            levels=tuple(int(v) for v in labels),
            k=1,
        )

        with pytest.raises(TrainingError) as exc_info:
            train_svm(gram, label_set, C=10.0)

        assert "different scenes" in str(exc_info.value)

    def test_xor_not_linearly_separable(self) -> None:
        """Test a linear kernel cannot fit all four corners of an XOR layout."""
        points = np.array([[1.0, 1.0], [-1.0, -1.0], [1.0, -1.0], [-1.0, 1.0]])
        labels = np.array([1, 1, 2, 2])
        gram = linear_gram(points)

        model = train_svm(gram, labels, C=10.0)

        accuracy = float(np.mean(predict_many(model, gram.values) == labels))
        assert accuracy <= 0.75

    def test_equality_constraint_enforced(self) -> None:
        """Test a pair whose coefficients do not sum to zero is rejected."""
        with pytest.raises(TrainingError) as exc_info:
            BinaryModel(
                positive=1,
                negative=2,
                support=(0, 1),
                coef=(1.0, -1.0 + 1e-5),
                bias=0.0,
            )

        assert "equality constraint" in str(exc_info.value)

    def test_equality_constraint_tolerance(self) -> None:
        """Test rounding below the dual tolerance is accepted."""
        model = BinaryModel(
            positive=1, negative=2, support=(0, 1), coef=(1.0, -1.0 + 1e-8), bias=0.0
        )

        assert model.support == (0, 1)


class TestPredict:
    """Tests for one-vs-one voting."""

    def _cyclic_model(self) -> TrainedModel:
        def pair(positive: int, negative: int, bias: float) -> BinaryModel:
            return BinaryModel(
                positive=positive,
                negative=negative,
                support=(0, 1),
                coef=(1.0, -1.0),
                bias=bias,
            )

        return TrainedModel(
            classes=(1, 2, 3),
            pairs=(pair(1, 2, 1.0), pair(1, 3, -1.0), pair(2, 3, 1.0)),
            C=1.0,
            train_size=2,
        )

    def test_tied_votes_go_to_smallest_class(self) -> None:
        """Test one vote each for three classes predicts the smallest."""
        assert predict(self._cyclic_model(), [0.0, 0.0]) == 1

    def test_zero_decision_votes_negative(self) -> None:
        """Test a decision value of exactly zero votes for the second class."""
        model = TrainedModel(
            classes=(1, 2),
            pairs=(BinaryModel(1, 2, support=(0, 1), coef=(1.0, -1.0), bias=0.0),),
            C=1.0,
            train_size=2,
        )

        assert predict(model, [0.0, 0.0]) == 2

    def test_row_length_mismatch(self) -> None:
        """Test a kernel row must cover the whole training set."""
        with pytest.raises(PredictionError) as exc_info:
            predict(self._cyclic_model(), [0.0, 0.0, 0.0])

        assert "trained on 2 samples" in str(exc_info.value)

    def test_unbalanced_pair(self) -> None:
        """Test a pair breaking the equality constraint is rejected."""
        with pytest.raises(TrainingError):
            BinaryModel(1, 2, support=(0, 1), coef=(1.0, -0.5), bias=0.0)


class TestStratifiedFolds:
    """Tests for seeded stratified fold assignment."""

    def test_fold_sizes(self) -> None:
        """Test 4550 samples in 5 folds give 910 test and 3640 training samples."""
        labels = np.repeat([1, 2, 3, 4], [1000, 1500, 1050, 1000])

        splits = stratified_folds(labels, folds=5, seed=0)

        assert len(splits) == 5
        assert all(test.size == 910 and train.size == 3640 for train, test in splits)
        tested = np.sort(np.concatenate([test for _, test in splits]))
        np.testing.assert_array_equal(tested, np.arange(4550))

    def test_class_shares_preserved(self) -> None:
        """Test every test fold keeps the class proportions."""
        labels = np.repeat([1, 2], [40, 10])

        for _, test in stratified_folds(labels, folds=5, seed=1):
            assert np.sum(labels[test] == 1) == 8
            assert np.sum(labels[test] == 2) == 2

    def test_seeded(self) -> None:
        """Test the same seed repeats the assignment and another seed changes it."""
        labels = np.repeat([1, 2, 3], 20)

        first = stratified_folds(labels, 4, seed=3)
        second = stratified_folds(labels, 4, seed=3)
        other = stratified_folds(labels, 4, seed=4)

        assert all(np.array_equal(a[1], b[1]) for a, b in zip(first, second))
        assert any(not np.array_equal(a[1], b[1]) for a, b in zip(first, other))

    def test_class_smaller_than_folds(self) -> None:
        """Test a class with fewer members than folds is reported."""
        with pytest.raises(FoldError) as exc_info:
            stratified_folds([1] * 10 + [2] * 3, folds=5)

        assert "Class 2 has 3 members" in str(exc_info.value)

    def test_single_fold(self) -> None:
        """Test fewer than two folds are rejected."""
        with pytest.raises(FoldError):
            stratified_folds([1, 2, 1, 2], folds=1)


class TestCrossValidation:
    """Tests for cross-validated evaluation."""

    def test_separable_classes(self) -> None:
        """Test every sample is tested once and separable data scores 1.0."""
        points, labels = _blobs(15, classes=(1, 2, 3))

        report = cross_validate_gram(linear_gram(points), labels, C=10.0, folds=3)

        assert report.confusion.total == 45
        assert report.confusion.accuracy == 1.0
        assert report.fold_accuracies == (1.0, 1.0, 1.0)
        assert report.name == "linear"

    def test_report_dict_round_trip(self) -> None:
        """Test a report survives its dictionary form."""
        points, labels = _blobs(10, spread=3.0, seed=7)

        report = cross_validate_gram(linear_gram(points), labels, folds=2, seed=1)

        assert EvaluationReport.from_dict(report.to_dict()) == report

    def test_scene_mismatch(self) -> None:
        """Test labels and Gram rows must refer to the same scenes."""
        points, labels = _blobs(5)
        gram = linear_gram(points, [f"s{i}" for i in range(10)])
        label_set = RiskLabelSet(
            scene_refs=tuple(f"t{i}" for i in range(10)),
            levels=tuple(int(v) for v in labels),
            k=1,
        )

        with pytest.raises(FoldError) as exc_info:
            cross_validate_gram(gram, label_set, folds=2)

        assert "different scenes" in str(exc_info.value)

    def test_label_count_mismatch(self) -> None:
        """Test the label count must equal the Gram size."""
        points, _ = _blobs(5)

        with pytest.raises(FoldError):
            cross_validate_gram(linear_gram(points), [1, 2] * 4, folds=2)

    def test_linear_feature_path(self) -> None:
        """Test lane-change features are scaled and classified linearly."""
        rng = np.random.default_rng(8)
        features = np.concatenate(
            [
                rng.normal((0.0, 20.0, 0.0, -1.0), 0.2, size=(12, 4)),
                rng.normal((0.0, 60.0, 0.0, 2.0), 0.2, size=(12, 4)),
            ]
        )
        labels = [1] * 12 + [2] * 12

        report = vrm_classifier_path(features, labels, C=10.0, folds=3)

        assert report.name == "linear"
        assert report.confusion.accuracy == 1.0

    def test_linear_feature_scene_mismatch(self) -> None:
        """Test lane-change features and labels must refer to the same scenes."""
        features = np.arange(40.0).reshape(10, 4)
        label_set = RiskLabelSet(
            scene_refs=tuple(f"s{i}" for i in range(10)),
            levels=(1, 2) * 5,
            k=1,
        )

        with pytest.raises(FoldError) as exc_info:
            vrm_classifier_path(
                features, label_set, folds=2, refs=[f"t{i}" for i in range(10)]
            )

        assert "different scenes" in str(exc_info.value)

    def test_linear_feature_count_mismatch(self) -> None:
        """Test the feature rows must match the label count."""
        with pytest.raises(FoldError) as exc_info:
            vrm_classifier_path(np.zeros((5, 4)), [1, 2] * 3, folds=2)

        assert "does not match 6 labels" in str(exc_info.value)


class TestScaleByReference:
    """Tests for fold-local feature scaling."""

    def test_uses_reference_extrema(self) -> None:
        """Test points are mapped by the reference range without clipping."""
        reference = np.array([[0.0], [2.0]])

        scaled = scale_by_reference(np.array([[4.0], [1.0]]), reference)

        np.testing.assert_allclose(scaled, [[3.0], [0.0]])

    def test_constant_column_becomes_zero(self) -> None:
        """Test a column constant in the reference scales to zeros."""
        reference = np.array([[1.0, 0.0], [1.0, 4.0]])

        scaled = scale_by_reference(np.array([[7.0, 2.0]]), reference)

        np.testing.assert_allclose(scaled, [[0.0, 0.0]])

    def test_learning_curve(self) -> None:
        """Test one row per training fraction with every fold scored."""
        points, labels = _blobs(10, classes=(1, 2, 3))

        curve = learning_curve(
            linear_gram(points), labels, fractions=(0.5, 1.0), C=10.0, folds=2
        )

        assert list(curve.columns) == [
            "fraction",
            "train_size",
            "accuracy",
            "folds_scored",
        ]
        assert list(curve["fraction"]) == [0.5, 1.0]
        assert list(curve["train_size"]) == [8.0, 15.0]
        assert curve["accuracy"].iloc[-1] == 1.0
        assert all(curve["folds_scored"] == 2)

    def test_learning_curve_bad_fraction(self) -> None:
        """Test a fraction outside (0, 1] is rejected."""
        points, labels = _blobs(5)

        with pytest.raises(FoldError):
            learning_curve(linear_gram(points), labels, fractions=(1.5,), folds=2)


class TestConfusionMatrix:
    """Tests for confusion counts and derived metrics."""

    def test_metrics(self) -> None:
        """Test accuracy, recall and precision of a small prediction set."""
        confusion = ConfusionMatrix.from_predictions(
            [1, 1, 2, 2, 3], [1, 2, 2, 2, 1], [1, 2, 3]
        )

        assert confusion.counts == ((1, 1, 0), (0, 2, 0), (1, 0, 0))
        assert confusion.accuracy == pytest.approx(0.6)
        assert confusion.recall() == {1: 0.5, 2: 1.0, 3: 0.0}
        assert confusion.precision() == pytest.approx({1: 0.5, 2: 2 / 3, 3: 0.0})

    def test_cells(self) -> None:
        """Test the cell table lists every (target, output) pair."""
        confusion = ConfusionMatrix.from_predictions([1, 2], [2, 2], [1, 2])

        cells = confusion.cells()

        assert len(cells) == 4
        assert int(cells["count"].sum()) == 2

    def test_wrong_shape(self) -> None:
        """Test counts must be square in the number of classes."""
        with pytest.raises(ClassifyError) as exc_info:
            ConfusionMatrix(classes=(1, 2), counts=((1, 0),))

        assert "must be 2×2" in str(exc_info.value)
