"""
Tests for UCR loading, synthetic generation and normalization
"""

import os
import sys
from pathlib import Path

sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

import numpy as np
import pytest
from pydantic import ValidationError

from data import (
    DatasetFormatError,
    EmptyDatasetError,
    LabeledSeriesSet,
    SyntheticSpec,
    apply_normalization,
    class_templates,
    generate_synthetic,
    load_ucr_tsv,
    save_ucr_tsv,
    split_holdout,
    zscore_normalize,
)

GUNPOINT = Path(os.getenv("CONCEAL_DATA_DIR", "datasets")) / "GunPoint" / "GunPoint_TRAIN.tsv"


def write(tmp_path, text, name="set.tsv"):
    path = tmp_path / name
    path.write_text(text, encoding="utf-8")
    return path


class TestLoadUcr:
    def test_two_row_file(self, tmp_path):
        data = load_ucr_tsv(write(tmp_path, "1\t0.0\t1.0\n2\t1.0\t0.0\n"))
        assert (data.n, data.length) == (2, 2)
        np.testing.assert_array_equal(data.labels, [0, 1])
        np.testing.assert_array_equal(data.features, [[0.0, 1.0], [1.0, 0.0]])
        assert data.label_mapping == {"1": 0, "2": 1}

    def test_labels_ordered_numerically(self, tmp_path):
        data = load_ucr_tsv(write(tmp_path, "10\t0\t0\n-1\t1\t1\n2\t2\t2\n"))
        assert data.label_mapping == {"-1": 0, "2": 1, "10": 2}
        np.testing.assert_array_equal(data.labels, [2, 0, 1])

    def test_float_labels_canonicalized(self, tmp_path):
        data = load_ucr_tsv(write(tmp_path, "1.0000000e+00\t0.5\t0.5\n2.0000000e+00\t0.1\t0.2\n"))
        assert data.label_mapping == {"1": 0, "2": 1}

    def test_ragged_rows(self, tmp_path):
        with pytest.raises(DatasetFormatError):
            load_ucr_tsv(write(tmp_path, "1\t0.1\t0.2\t0.3\n2\t0.1\t0.2\n1\t0.4\t0.5\t0.6\n"))

    def test_row_longer_than_first(self, tmp_path):
        with pytest.raises(DatasetFormatError):
            load_ucr_tsv(write(tmp_path, "1\t0.1\t0.2\n2\t0.1\t0.2\t0.3\n"))

    def test_non_numeric_cell(self, tmp_path):
        with pytest.raises(DatasetFormatError, match="non-numeric"):
            load_ucr_tsv(write(tmp_path, "1\t0.1\tabc\n2\t0.1\t0.2\n"))

    def test_empty_file(self, tmp_path):
        with pytest.raises(DatasetFormatError, match="empty"):
            load_ucr_tsv(write(tmp_path, ""))

    def test_unknown_label_with_mapping(self, tmp_path):
        with pytest.raises(DatasetFormatError):
            load_ucr_tsv(write(tmp_path, "3\t0.1\t0.2\n"), label_mapping={"1": 0, "2": 1})

    def test_test_split_uses_train_mapping(self, tmp_path):
        train = load_ucr_tsv(write(tmp_path, "1\t0\t0\n2\t1\t1\n", "train.tsv"))
        test = load_ucr_tsv(write(tmp_path, "2\t0\t0\n2\t1\t1\n", "test.tsv"), label_mapping=train.label_mapping)
        np.testing.assert_array_equal(test.labels, [1, 1])
        assert test.n_classes == 2

    def test_save_then_reload_is_identity(self, tmp_path):
        rng = np.random.default_rng(0)
        original = LabeledSeriesSet(
            features=rng.normal(size=(6, 9)) * 1e3, labels=[0, 1, 1, 0, 1, 0],
            label_mapping={"-1": 0, "1": 1},
        )
        reloaded = load_ucr_tsv(save_ucr_tsv(original, tmp_path / "out.tsv"))
        assert reloaded.features.tobytes() == original.features.tobytes()
        np.testing.assert_array_equal(reloaded.labels, original.labels)
        assert reloaded.label_mapping == original.label_mapping

    @pytest.mark.skipif(not GUNPOINT.exists(), reason="GunPoint archive not downloaded")
    def test_gunpoint_shape(self):
        data = load_ucr_tsv(GUNPOINT)
        assert (data.n, data.length) == (50, 150)


class TestSeriesSet:
    def test_empty_rejected(self):
        with pytest.raises(EmptyDatasetError):
            LabeledSeriesSet(features=np.zeros((0, 4)), labels=[])

    def test_label_count_mismatch(self):
        with pytest.raises(ValueError):
            LabeledSeriesSet(features=np.zeros((3, 4)), labels=[0, 1])

    def test_split_is_stratified_and_seeded(self):
        data = generate_synthetic(SyntheticSpec(n_per_class=50, length=8, seed=1))
        train, holdout = split_holdout(data, 0.2, seed=3)
        again, _ = split_holdout(data, 0.2, seed=3)
        assert (train.n, holdout.n) == (80, 20)
        np.testing.assert_array_equal(holdout.class_counts(), [10, 10])
        assert train.features.tobytes() == again.features.tobytes()


class TestSynthetic:
    def test_noise_free_two_sine(self):
        data = generate_synthetic(SyntheticSpec(n_per_class=3, length=16, noise_std=0.0))
        t = np.arange(16)
        np.testing.assert_allclose(data.features[:3], np.tile(np.sin(2 * np.pi * t / 16), (3, 1)), atol=1e-15)
        np.testing.assert_allclose(data.features[3:], np.tile(np.sin(4 * np.pi * t / 16), (3, 1)), atol=1e-15)
        np.testing.assert_array_equal(data.labels, [0, 0, 0, 1, 1, 1])

    @pytest.mark.parametrize("kind", ["two_sine", "warped_bump"])
    def test_same_seed_same_data(self, kind):
        spec = SyntheticSpec(kind=kind, n_per_class=5, length=20, seed=7)
        assert generate_synthetic(spec).features.tobytes() == generate_synthetic(spec).features.tobytes()

    def test_different_seed_different_noise(self):
        a = generate_synthetic(SyntheticSpec(seed=1, n_per_class=4, length=10))
        b = generate_synthetic(SyntheticSpec(seed=2, n_per_class=4, length=10))
        assert not np.array_equal(a.features, b.features)

    def test_warped_bump_peaks_by_class(self):
        data = generate_synthetic(SyntheticSpec(kind="warped_bump", n_per_class=20, length=60, noise_std=0.0))
        peaks = np.argmax(data.features, axis=1)
        assert np.all(peaks[data.labels == 0] < 30)
        assert np.all(peaks[data.labels == 1] >= 30)
        assert class_templates("warped_bump", 60).shape == (2, 60)

    @pytest.mark.parametrize("kwargs", [dict(n_per_class=1), dict(noise_std=-0.1), dict(kind="square")])
    def test_invalid_spec(self, kwargs):
        with pytest.raises(ValidationError):
            SyntheticSpec(**kwargs)


class TestNormalization:
    def test_constant_train_maps_to_zero(self):
        train = LabeledSeriesSet(features=np.full((4, 5), 3.0), labels=[0, 1, 0, 1])
        normalized, _ = zscore_normalize(train)
        np.testing.assert_array_equal(normalized.features, np.zeros((4, 5)))
        assert normalized.stats.std == 1e-8

    def test_train_has_zero_mean_unit_std(self):
        raw = generate_synthetic(SyntheticSpec(n_per_class=30, length=20, seed=2))
        shifted = raw.with_features(raw.features * 4.0 + 7.0)
        normalized, _ = zscore_normalize(shifted)
        assert abs(normalized.features.mean()) <= 1e-9
        assert normalized.features.std() == pytest.approx(1.0, abs=1e-9)

    def test_test_set_uses_train_stats(self):
        train = generate_synthetic(SyntheticSpec(n_per_class=30, length=20, seed=2))
        test = train.with_features(train.features + 5.0)
        _, (normalized_test,) = zscore_normalize(train, [test])
        assert normalized_test.features.mean() > 1.0
        assert normalized_test.stats == zscore_normalize(train)[0].stats

    def test_applying_stats_twice_differs(self):
        train = generate_synthetic(SyntheticSpec(n_per_class=10, length=12, seed=5))
        shifted = train.with_features(train.features * 3.0 + 2.0)
        once, _ = zscore_normalize(shifted)
        twice = apply_normalization(once, once.stats)
        assert not np.allclose(once.features, twice.features)
