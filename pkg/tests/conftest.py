"""
Shared fixtures: a small separable two_sine set and a quickly trained MLP
"""

import os
import sys

sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

import pytest

from data.normalize import zscore_normalize
from data.synthetic import SyntheticSpec, generate_synthetic
from models import ModelSpec, TrainConfig, build, fit


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: long-running end-to-end checks")


@pytest.fixture(scope="session")
def two_sine():
    raw = generate_synthetic(SyntheticSpec(n_per_class=40, length=32, noise_std=0.3, seed=3))
    train, _ = zscore_normalize(raw)
    return train


@pytest.fixture(scope="session")
def trained_mlp(two_sine):
    spec = ModelSpec(family="mlp", widths=[16], n_classes=2, input_length=two_sine.length)
    return fit(build(spec, seed=0), two_sine, TrainConfig(epochs=25, batch_size=16, learning_rate=0.01, seed=0))
