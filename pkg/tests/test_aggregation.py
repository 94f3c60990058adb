"""
Tests for the sum, harmonic and hypercone concealment objectives
"""

import math
import os
import sys

sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

import numpy as np
import pytest
from pydantic import ValidationError

from attacks import (
    AggregationError,
    AggregationSpec,
    DegenerateGradientError,
    clamp_disc_score,
    harmonic_objective,
    harmonic_partials,
    hypercone_gradient,
    hypercone_step,
    sum_objective,
)

ALPHA_GRID = [0.001, 0.01, 0.1, 1, 10, 100]
DELTA_GRID = [-0.5, -0.3, -0.1, 0.0, 0.1, 0.3, 0.5, 1.0]


class TestSumObjective:
    def test_zero_alpha_is_vanilla(self):
        assert sum_objective(1.7, 5.0, 0.0) == 1.7

    def test_arithmetic(self):
        assert sum_objective(1.0, 2.0, 0.5) == 2.0

    @pytest.mark.parametrize("alpha", ALPHA_GRID)
    def test_linear_in_alpha(self, alpha):
        base = sum_objective(0.4, 2.5, 0.0)
        assert sum_objective(0.4, 2.5, alpha) - base == pytest.approx(alpha * 2.5)

    def test_monotone_in_disc_term(self):
        values = [sum_objective(1.0, d, 0.3) for d in np.linspace(0, 5, 11)]
        assert all(b >= a for a, b in zip(values, values[1:]))

    def test_non_finite(self):
        with pytest.raises(AggregationError):
            sum_objective(float("nan"), 1.0, 1.0)


class TestHarmonicObjective:
    def test_annihilator(self):
        assert harmonic_objective(0.0, 4.0, 1e-8) == 0.0

    def test_mean_of_equals(self):
        assert harmonic_objective(1.0, 1.0, 1e-12) == pytest.approx(1.0, abs=1e-9)

    def test_arithmetic(self):
        assert harmonic_objective(1.0, 3.0, 0.0) == 1.5

    def test_zero_denominator(self):
        assert harmonic_objective(0.0, 0.0, 0.0) == 0.0

    def test_symmetric_and_bounded(self):
        rng = np.random.default_rng(0)
        a, d = rng.uniform(0, 5, 200), rng.uniform(0, 5, 200)
        np.testing.assert_array_equal(harmonic_objective(a, d, 1e-8), harmonic_objective(d, a, 1e-8))
        assert np.all(harmonic_objective(a, d, 1e-8) <= 2 * np.minimum(a, d))

    @pytest.mark.parametrize("a,d", [(-1.0, 1.0), (1.0, -0.1)])
    def test_negative_input(self, a, d):
        with pytest.raises(AggregationError):
            harmonic_objective(a, d, 1e-8)

    def test_partials_match_finite_differences(self):
        a, d, gamma, h = 0.7, 2.3, 1e-3, 1e-6
        da, dd = harmonic_partials(np.array([a]), np.array([d]), gamma)
        fd_a = (harmonic_objective(a + h, d, gamma) - harmonic_objective(a - h, d, gamma)) / (2 * h)
        fd_d = (harmonic_objective(a, d + h, gamma) - harmonic_objective(a, d - h, gamma)) / (2 * h)
        assert da[0] == pytest.approx(fd_a, rel=1e-6)
        assert dd[0] == pytest.approx(fd_d, rel=1e-6)


class TestHypercone:
    def test_orthogonal_pair_at_zero_delta(self):
        g_t = np.array([3.0, 0.0, -1.0])
        g_d = np.array([0.0, 2.0, 0.0])
        np.testing.assert_allclose(hypercone_gradient(g_t, g_d, 0.0), g_t, atol=1e-9)

    def test_zero_delta_removes_disc_component(self):
        rng = np.random.default_rng(1)
        for _ in range(200):
            g_t, g_d = rng.normal(size=16), rng.normal(size=16)
            out = hypercone_gradient(g_t, g_d, 0.0)
            cos = np.dot(out, g_d) / (np.linalg.norm(out) * np.linalg.norm(g_d))
            assert abs(cos) <= 1e-5

    @pytest.mark.parametrize("delta", DELTA_GRID)
    def test_scale_covariant(self, delta):
        rng = np.random.default_rng(2)
        g_t, g_d = rng.normal(size=10), rng.normal(size=10)
        np.testing.assert_allclose(hypercone_gradient(3.5 * g_t, g_d, delta),
                                   3.5 * hypercone_gradient(g_t, g_d, delta), rtol=1e-12, atol=1e-12)

    def test_collinear_falls_back(self):
        g_t = np.array([1.0, 2.0, 3.0])
        np.testing.assert_array_equal(hypercone_gradient(g_t, 2.0 * g_t, 0.3), g_t)
        np.testing.assert_array_equal(hypercone_gradient(g_t, -g_t, 0.3), g_t)

    def test_step_flags_collinear_pairs(self):
        g_t = np.array([1.0, 2.0, 3.0])
        for g_d in (2.0 * g_t, -g_t):
            out, collinear = hypercone_step(g_t, g_d, 0.3)
            assert collinear
            np.testing.assert_array_equal(out, g_t)
        _, collinear = hypercone_step(g_t, np.array([0.0, 1.0, -1.0]), 0.3)
        assert not collinear

    def test_zero_gradient(self):
        with pytest.raises(DegenerateGradientError):
            hypercone_gradient(np.zeros(3), np.ones(3), 0.1)
        with pytest.raises(DegenerateGradientError):
            hypercone_gradient(np.ones(3), np.zeros(3), 0.1)


class TestAggregationSpec:
    def test_defaults(self):
        spec = AggregationSpec()
        assert (spec.kind.value, spec.alpha, spec.gamma, spec.delta) == ("none", 1.0, 1e-8, 0.0)
        assert not spec.regularized
        assert spec.normalize_gradients

    @pytest.mark.parametrize("kwargs", [
        dict(kind="hypercone", delta=math.pi / 2),
        dict(kind="sum", alpha=-1.0),
        dict(kind="harmonic", gamma=0.0),
        dict(kind="product"),
    ])
    def test_invalid(self, kwargs):
        with pytest.raises(ValidationError):
            AggregationSpec(**kwargs)

    def test_disc_score_clamp(self):
        np.testing.assert_array_equal(clamp_disc_score(np.array([0.0, 0.5, 1.0])), [1e-7, 0.5, 1 - 1e-7])
