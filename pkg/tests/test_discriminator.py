"""
Tests for adversarial dataset construction and the decreasing-strength curriculum
"""

import os
import sys

sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

import numpy as np
import pytest
from pydantic import ValidationError

import discriminator.curriculum as curriculum_module
from attacks import AttackConfig
from discriminator import (
    AttackNotVanillaError,
    CurriculumConfig,
    build_adversarial_dataset,
    curriculum_attack,
    curriculum_train,
    disc_score,
)
from models import ModelSpec, TrainConfig

FAST_TRAIN = TrainConfig(epochs=3, batch_size=16, learning_rate=0.01)


def fast_curriculum(**kwargs):
    base = dict(eps_init=0.5, decay=0.8, threshold=0.9, max_rounds=4, train=FAST_TRAIN, finetune_epochs=1)
    return CurriculumConfig(**{**base, **kwargs})


@pytest.fixture(scope="module")
def disc_spec(two_sine):
    return ModelSpec(family="mlp", widths=[8], input_length=two_sine.length)


@pytest.fixture(scope="module")
def trained_curriculum(trained_mlp, two_sine, disc_spec):
    cfg = fast_curriculum(train=TrainConfig(epochs=20, batch_size=16, learning_rate=0.02), finetune_epochs=3)
    return curriculum_train(disc_spec, two_sine, trained_mlp, AttackConfig(iterations=4), cfg)


class TestAdversarialDataset:
    def test_layout(self, trained_mlp, two_sine):
        cfg = AttackConfig(kind="ifgsm", eps=0.05, iterations=4)
        data = build_adversarial_dataset(trained_mlp, cfg, two_sine)
        n = two_sine.n
        assert data.features.shape == (2 * n, two_sine.length)
        np.testing.assert_array_equal(data.labels, np.r_[np.zeros(n), np.ones(n)])
        np.testing.assert_array_equal(data.originals, two_sine.features)
        assert np.abs(data.perturbed - data.originals).max() <= 4 * 0.05 + 1e-12
        assert data.as_series_set().n_classes == 2

    def test_rejects_regularized_attack(self, trained_mlp, two_sine):
        cfg = AttackConfig(kind="ifgsm", aggregation={"kind": "sum", "alpha": 1.0})
        with pytest.raises(AttackNotVanillaError):
            build_adversarial_dataset(trained_mlp, cfg, two_sine)

    def test_disc_score_is_clamped_probability(self, trained_mlp, two_sine):
        scores = disc_score(trained_mlp, two_sine.features)
        assert scores.shape == (two_sine.n,)
        assert np.all((scores >= 1e-7) & (scores <= 1 - 1e-7))


class TestCurriculumConfig:
    @pytest.mark.parametrize("kwargs", [dict(decay=1.0), dict(decay=0.0), dict(threshold=0.5),
                                        dict(eps_init=0.0), dict(max_rounds=0)])
    def test_invalid(self, kwargs):
        with pytest.raises(ValidationError):
            CurriculumConfig(**kwargs)

    def test_geometric_strengths(self):
        cfg = CurriculumConfig(eps_init=0.03, decay=0.8)
        assert [cfg.strength_at(i) for i in range(3)] == pytest.approx([0.03, 0.024, 0.0192])

    def test_data_attack_is_shortened_vanilla(self):
        attack = AttackConfig(kind="pgd", eta=0.5, iterations=9, aggregation={"kind": "harmonic"})
        data_attack = curriculum_attack(attack, CurriculumConfig(eps_init=0.2))
        assert data_attack.vanilla
        assert data_attack.iterations == 4
        assert data_attack.eta == 0.2

    def test_explicit_iterations(self):
        attack = AttackConfig(kind="ifgsm", iterations=10)
        assert curriculum_attack(attack, CurriculumConfig(attack_iterations=7)).iterations == 7


class TestCurriculumTrain:
    def test_scripted_accuracies(self, monkeypatch, trained_mlp, two_sine, disc_spec):
        accuracies = iter([0.99, 0.95, 0.7])
        monkeypatch.setattr(curriculum_module, "disc_accuracy", lambda disc, data: next(accuracies))
        result = curriculum_train(disc_spec, two_sine, trained_mlp, AttackConfig(iterations=4), fast_curriculum())
        assert result.schedule == pytest.approx([0.5, 0.4, 0.32])
        assert [r.passed for r in result.rounds] == [True, True, False]
        assert result.last_passing_strength == pytest.approx(0.4)
        assert result.first_failed_strength == pytest.approx(0.32)
        assert result.converged
        assert result.robust_discriminator is result.last_passing_discriminator
        assert result.robust_discriminator is not result.discriminator

    def test_stops_at_max_rounds(self, monkeypatch, trained_mlp, two_sine, disc_spec):
        monkeypatch.setattr(curriculum_module, "disc_accuracy", lambda disc, data: 1.0)
        result = curriculum_train(disc_spec, two_sine, trained_mlp, AttackConfig(iterations=4),
                                  fast_curriculum(max_rounds=3))
        assert len(result.schedule) == 3
        assert result.first_failed_strength is None
        assert result.robust_discriminator is result.discriminator

    def test_unreachable_threshold(self, trained_mlp, two_sine, disc_spec):
        result = curriculum_train(disc_spec, two_sine, trained_mlp, AttackConfig(iterations=4),
                                  fast_curriculum(threshold=1.0))
        assert len(result.rounds) == 1
        assert not result.converged
        assert result.last_passing_discriminator is None
        assert result.robust_discriminator is result.discriminator

    def test_loop_invariants(self, trained_curriculum):
        result, cfg = trained_curriculum, fast_curriculum()
        assert 1 <= len(result.schedule) <= cfg.max_rounds
        ratios = np.array(result.schedule[1:]) / np.array(result.schedule[:-1])
        np.testing.assert_allclose(ratios, cfg.decay)
        assert all(r.passed for r in result.rounds[:-1])
        assert all(0.0 <= a <= 1.0 for a in result.accuracies)
        assert result.discriminator.n_classes == 2

    def test_holdout_per_round(self, trained_curriculum):
        result = trained_curriculum
        assert len(result.holdout_sets) == len(result.rounds)
        for holdout, strength in zip(result.holdout_sets, result.schedule):
            assert holdout.attack.strength == pytest.approx(strength)

    def test_perturbed_scored_higher(self, trained_curriculum):
        result = trained_curriculum
        holdout = result.holdout_sets[-1]
        scores = disc_score(result.robust_discriminator, holdout.features)
        assert scores[holdout.labels == 1].mean() > scores[holdout.labels == 0].mean()
        assert result.score_gap() > 0.0

    def test_robust_discriminator_keeps_earlier_levels(self, trained_curriculum):
        result = trained_curriculum
        retained = result.holdout_accuracies()
        passing = [r for r in result.rounds if r.passed]
        assert passing
        assert retained[passing[-1].index] == passing[-1].accuracy
        for r in passing:
            assert retained[r.index] >= r.accuracy - 0.05
        assert result.summary()["retained_accuracies"] == retained

    def test_width_scale(self, monkeypatch, trained_mlp, two_sine):
        monkeypatch.setattr(curriculum_module, "disc_accuracy", lambda disc, data: 0.0)
        spec = ModelSpec(family="mlp", widths=[16], input_length=two_sine.length)
        result = curriculum_train(spec, two_sine, trained_mlp, AttackConfig(kind="pgd", eta=0.5, iterations=4),
                                  fast_curriculum(width_scale=0.5))
        assert result.discriminator.spec.widths == (8,)

    def test_deterministic(self, trained_mlp, two_sine, disc_spec):
        cfg = fast_curriculum(max_rounds=2)
        a = curriculum_train(disc_spec, two_sine, trained_mlp, AttackConfig(iterations=4), cfg)
        b = curriculum_train(disc_spec, two_sine, trained_mlp, AttackConfig(iterations=4), cfg)
        assert a.schedule == b.schedule
        for name, value in a.discriminator.parameters.items():
            np.testing.assert_array_equal(value, b.discriminator.parameters[name])
