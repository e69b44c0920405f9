"""Sampler, oracle accounting, and projection behavior."""

import numpy as np
import pytest

from adastep import (
    ConfigurationError,
    CountingOracle,
    DiagonalQuadraticProblem,
    MinibatchSampler,
    NonFiniteOracleError,
    ProjectionDomain,
    make_rng,
    project,
)
from adastep.problem_core import OracleCounters


class TestSampler:
    def test_single_component(self):
        assert MinibatchSampler(1, 1, seed=0).sample().tolist() == [0]

    def test_full_batch(self):
        assert MinibatchSampler(4, 4, seed=0).sample().tolist() == [0, 1, 2, 3]

    def test_golden_sequence(self):
        # frozen from the PCG64 stream for (seed=42, n=50, B=2)
        sampler = MinibatchSampler(50, 2, seed=42)
        assert sampler.sample().tolist() == [24, 45]
        assert sampler.sample().tolist() == [10, 44]

    def test_replay_identical(self):
        a = MinibatchSampler(50, 3, seed=9)
        b = MinibatchSampler(50, 3, seed=9)
        for _ in range(20):
            assert a.sample().tolist() == b.sample().tolist()

    def test_batch_size_validation(self):
        with pytest.raises(ConfigurationError):
            MinibatchSampler(3, 4, seed=0)
        with pytest.raises(ConfigurationError):
            MinibatchSampler(3, 0, seed=0)

    def test_sorted_distinct(self):
        sampler = MinibatchSampler(20, 5, seed=3)
        for _ in range(50):
            batch = sampler.sample()
            assert len(set(batch.tolist())) == 5
            assert np.all(np.diff(batch) > 0)

    def test_uniform_marginals(self):
        # over 1e5 draws with n=10, B=2 every index lands within 3 sigma
        # of its expected count 2e4
        sampler = MinibatchSampler(10, 2, seed=4)
        counts = np.zeros(10)
        draws = 100_000
        for _ in range(draws):
            counts[sampler.sample()] += 1
        expected = draws * 2 / 10
        sigma = np.sqrt(draws * 0.2 * 0.8)
        assert np.all(np.abs(counts - expected) <= 3 * sigma)


def _quadratic():
    return DiagonalQuadraticProblem(
        np.array([[1.0], [1.0]]), np.array([[0.0], [2.0]]), interpolated=False
    )


class TestCountingOracle:
    def test_counter_increments(self):
        oracle = CountingOracle(_quadratic())
        x = np.zeros(1)
        oracle.minibatch_value(np.array([0, 1]), x)
        assert oracle.counters.function_evals == 1
        oracle.minibatch_gradient(np.array([0, 1]), x)
        assert oracle.counters.stochastic_grad_evals == 2
        oracle.full_gradient(x)
        assert oracle.counters.full_grad_evals == 1
        assert oracle.counters.stochastic_grad_evals == 2

    def test_gradient_cost_identity(self):
        counters = OracleCounters(stochastic_grad_evals=7, full_grad_evals=3)
        assert counters.gradient_cost(10) == 7 + 3 * 10

    def test_minibatch_values(self):
        oracle = CountingOracle(_quadratic())
        assert oracle.minibatch_value(np.array([0, 1]), np.zeros(1)) == 1.0
        assert oracle.minibatch_value(np.array([0]), np.zeros(1)) == 0.0

    def test_full_gradient_matches_batch(self):
        problem = _quadratic()
        oracle = CountingOracle(problem)
        x = np.array([0.7])
        full = oracle.full_gradient(x)
        batch = oracle.minibatch_gradient(np.array([0, 1]), x)
        assert full == pytest.approx(batch, abs=1e-12)
        assert full[0] == pytest.approx(-1.0 + 0.7, abs=1e-12)

    def test_dimension_mismatch(self):
        oracle = CountingOracle(_quadratic())
        with pytest.raises(ConfigurationError):
            oracle.minibatch_value(np.array([0]), np.zeros(3))

    def test_nonfinite_detection(self):
        problem = _quadratic()
        oracle = CountingOracle(problem)
        with pytest.raises(NonFiniteOracleError):
            oracle.minibatch_value(np.array([0]), np.array([np.inf]))


class TestFiniteDifferences:
    @pytest.mark.parametrize("seed", [0, 1, 2])
    def test_quadratic_gradients(self, seed, gc_instance):
        rng = make_rng(seed, stream=5)
        problem = gc_instance
        x = rng.normal(0.0, 2.0, size=problem.dim)
        batch = np.sort(rng.choice(problem.n, size=4, replace=False))
        grad = problem.batch_gradient(batch, x)
        direction = rng.normal(size=problem.dim)
        direction /= np.linalg.norm(direction)
        h = 1e-5
        fd = (problem.batch_value(batch, x + h * direction)
              - problem.batch_value(batch, x - h * direction)) / (2 * h)
        assert fd == pytest.approx(float(grad @ direction), rel=1e-6, abs=1e-6)

    def test_batch_equals_full_at_full_batch(self, sc_instance):
        x = make_rng(0).normal(size=sc_instance.dim)
        every = np.arange(sc_instance.n)
        assert sc_instance.batch_value(every, x) == pytest.approx(
            sc_instance.full_value(x), rel=1e-12)
        np.testing.assert_allclose(
            sc_instance.batch_gradient(every, x), sc_instance.full_gradient(x),
            rtol=1e-12, atol=1e-12)


class TestProjection:
    def test_ball_scaling(self):
        domain = ProjectionDomain(kind="euclidean_ball", center=0.0, radius=1.0)
        np.testing.assert_allclose(project(domain, np.array([3.0, 4.0])),
                                   [0.6, 0.8], rtol=1e-12)

    def test_interior_unchanged(self):
        domain = ProjectionDomain(kind="euclidean_ball", center=0.0, radius=2.0)
        x = np.array([0.3, -0.4])
        assert project(domain, x) is x

    def test_unconstrained_identity(self):
        x = np.array([5.0, -7.0])
        assert project(ProjectionDomain(), x) is x

    def test_idempotent_and_nonexpansive(self):
        domain = ProjectionDomain(kind="euclidean_ball",
                                  center=np.array([1.0, -1.0, 0.5]), radius=0.8)
        rng = make_rng(5)
        for _ in range(100):
            x = rng.normal(0.0, 3.0, size=3)
            y = rng.normal(0.0, 3.0, size=3)
            px, py = project(domain, x), project(domain, y)
            np.testing.assert_allclose(project(domain, px), px, atol=1e-12)
            assert np.linalg.norm(px - py) <= np.linalg.norm(x - y) + 1e-12

    def test_validation(self):
        with pytest.raises(ConfigurationError):
            ProjectionDomain(kind="euclidean_ball", radius=0.0)
        with pytest.raises(ConfigurationError):
            ProjectionDomain(kind="cube")
