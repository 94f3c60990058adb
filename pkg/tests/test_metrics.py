"""
Tests for F1, efficiency, concealability, successfulness and iteration selection
"""

import os
import sys

sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

import numpy as np
import pytest

from attacks import AttackConfig, ifgsm_attack
from metrics import (
    MetricInputError,
    MetricRow,
    SelectionReason,
    concealability,
    efficiency,
    evaluate_trajectory,
    f1,
    select_best_iteration,
    successfulness,
)


def brute_force_f1(y_true, y_pred, classes):
    scores = []
    for c in classes:
        tp = sum(1 for t, p in zip(y_true, y_pred) if t == c and p == c)
        fp = sum(1 for t, p in zip(y_true, y_pred) if t != c and p == c)
        fn = sum(1 for t, p in zip(y_true, y_pred) if t == c and p != c)
        scores.append(0.0 if 2 * tp + fp + fn == 0 else 2 * tp / (2 * tp + fp + fn))
    return sum(scores) / len(scores)


class FixedPredictor:
    """Stands in for a classifier whose predictions are known up front"""

    def __init__(self, predictions):
        self.predictions = np.asarray(predictions)

    def predict(self, x):
        return self.predictions[: len(x)]


class FirstFeatureDisc:
    """Reports the first feature, clipped to [0, 1], as the probability of 'perturbed'"""

    def predict_proba(self, x):
        p = np.clip(np.asarray(x)[:, 0], 0.0, 1.0)
        return np.column_stack([1.0 - p, p])


class TestF1:
    def test_perfect(self):
        assert f1([0, 1, 2, 1], [0, 1, 2, 1]) == 1.0

    def test_binary_all_wrong(self):
        assert f1([0, 1, 1, 0], [1, 0, 0, 1], "binary_pos1") == 0.0
        assert f1([0, 1, 1, 0], [1, 0, 0, 1], "macro") == 0.0

    def test_macro_oracle(self):
        rng = np.random.default_rng(0)
        for _ in range(1000):
            k = int(rng.integers(2, 6))
            y_true, y_pred = rng.integers(0, k, 200), rng.integers(0, k, 200)
            classes = sorted(set(y_true) | set(y_pred))
            assert f1(y_true, y_pred) == pytest.approx(brute_force_f1(y_true, y_pred, classes), rel=1e-12, abs=1e-12)

    def test_binary_oracle(self):
        rng = np.random.default_rng(1)
        for _ in range(200):
            y_true, y_pred = rng.integers(0, 2, 200), rng.integers(0, 2, 200)
            assert f1(y_true, y_pred, "binary_pos1") == pytest.approx(brute_force_f1(y_true, y_pred, [1]), rel=1e-12)

    def test_predicted_class_without_support_scores_zero(self):
        assert f1([0, 0, 1, 1], [0, 0, 1, 2]) == pytest.approx((1.0 + 2 / 3 + 0.0) / 3)

    @pytest.mark.parametrize("y_true,y_pred", [([], []), ([0, 1], [0]), ([0, -1], [0, 1]), ([0.5], [0])])
    def test_invalid(self, y_true, y_pred):
        with pytest.raises(MetricInputError):
            f1(y_true, y_pred)


class TestEfficiency:
    def test_accurate_target_scores_zero(self):
        assert efficiency(FixedPredictor([0, 1, 1, 0]), np.zeros((4, 3)), [0, 1, 1, 0]) == 0.0

    def test_fooled_everywhere_scores_one(self):
        assert efficiency(FixedPredictor([1, 0, 0, 1]), np.zeros((4, 3)), [0, 1, 1, 0]) == 1.0

    def test_clean_inputs_on_trained_model(self, trained_mlp, two_sine):
        assert efficiency(trained_mlp, two_sine.features, two_sine.labels) < 0.1

    def test_shape_mismatch(self):
        with pytest.raises(MetricInputError):
            efficiency(FixedPredictor([0, 1]), np.zeros((3, 2)), [0, 1])


class TestConcealability:
    def test_tie_counts_as_original(self):
        x = np.full((5, 4), 0.5)
        assert concealability(FirstFeatureDisc(), x, x) == 1.0

    def test_perfect_discriminator(self):
        assert concealability(FirstFeatureDisc(), np.zeros((6, 2)), np.ones((6, 2))) == 0.0

    def test_half_detected(self):
        adv = np.r_[np.ones((2, 2)), np.zeros((2, 2))]
        # tp=2, fn=2, fp=0 -> F1 = 4/6
        assert concealability(FirstFeatureDisc(), np.zeros((4, 2)), adv) == pytest.approx(1 - 4 / 6)

    def test_size_mismatch(self):
        with pytest.raises(MetricInputError):
            concealability(FirstFeatureDisc(), np.zeros((3, 2)), np.zeros((4, 2)))


class TestSuccessfulness:
    def test_identities(self):
        assert successfulness(1.0, 1.0) == 1.0
        assert successfulness(0.0, 0.7) == 0.0
        assert successfulness(0.0, 0.0) == 0.0
        for a in np.linspace(0.05, 1, 20):
            assert successfulness(a, a) == pytest.approx(a, rel=1e-12)

    def test_symmetric_and_bounded(self):
        rng = np.random.default_rng(2)
        for c, e in rng.uniform(0, 1, (500, 2)):
            s = successfulness(c, e)
            assert s == successfulness(e, c)
            assert 0.0 <= s <= 2 * min(c, e) + 1e-15

    def test_reported_vanilla_means(self):
        assert successfulness(0.861, 0.239) == pytest.approx(0.37419, abs=1e-4)

    @pytest.mark.parametrize("c,e", [(-0.1, 0.5), (0.5, 1.2), (float("nan"), 0.5)])
    def test_out_of_range(self, c, e):
        with pytest.raises(MetricInputError):
            successfulness(c, e)


def rows_from(values, start=1):
    return [MetricRow(iteration=start + i, efficiency=e, concealability=c, successfulness=successfulness(c, e))
            for i, (e, c) in enumerate(values)]


class TestSelection:
    def test_efficiency_escape(self):
        selection = select_best_iteration(rows_from([(0.95, 0.3)]), "ifgsm")
        assert (selection.index, selection.reason) == (0, SelectionReason.EFFICIENCY_ESCAPE)

    def test_monotone_curve(self):
        values = [(min(1.0, 0.3 + 0.005 * i), 0.5) for i in range(100)]
        rows = rows_from([(min(e, 0.9), c) for e, c in values])
        selection = select_best_iteration(rows, "ifgsm")
        eligible = [i for i, r in enumerate(rows) if r.iteration >= 40 or r.efficiency > 0.9]
        assert selection.index == max(eligible, key=lambda i: (rows[i].successfulness, -i))
        assert selection.reason == SelectionReason.ITERATION_FLOOR

    def test_strictly_increasing_curve_picks_last(self):
        rows = rows_from([(0.2 + 0.007 * i, 0.5) for i in range(100)])
        assert select_best_iteration(rows, "ifgsm").index == 99

    def test_floor_excludes_early_peak(self):
        rows = rows_from([(0.8, 0.9)] + [(0.5, 0.5)] * 49)
        selection = select_best_iteration(rows, "pgd")
        assert rows[selection.index].iteration >= 40

    def test_ties_go_to_earliest(self):
        rows = rows_from([(0.5, 0.5)] * 60)
        assert select_best_iteration(rows, "ifgsm").index == 39

    def test_floor_unmet(self):
        selection = select_best_iteration(rows_from([(0.3, 0.5)] * 10), "simba")
        assert (selection.index, selection.reason) == (9, SelectionReason.FLOOR_UNMET)

    def test_configurable_floors(self):
        rows = rows_from([(0.3, 0.5), (0.6, 0.5), (0.4, 0.5)])
        assert select_best_iteration(rows, "sgm", floors={"sgm": 0}).index == 1

    def test_empty(self):
        with pytest.raises(MetricInputError):
            select_best_iteration([], "ifgsm")


class TestEvaluateTrajectory:
    def test_rows_follow_recorded_iterations(self, trained_mlp, two_sine):
        x, y = two_sine.features[:20], two_sine.labels[:20]
        trajectory = ifgsm_attack(trained_mlp, None, x, y, AttackConfig(eps=0.05, iterations=10))
        report = evaluate_trajectory(trained_mlp, trained_mlp, trajectory, y, floors={"ifgsm": 0})
        assert [r.iteration for r in report.rows] == list(range(1, 11))
        frame = report.to_frame()
        assert list(frame.columns) == ["iteration", "E", "C", "S"]
        np.testing.assert_allclose(frame["S"], [successfulness(c, e) for c, e in zip(frame["C"], frame["E"])])
        assert report.best.successfulness == frame["S"].max()
