"""Problem instances: generator spectrum, exact minima, LIBSVM I/O,
logistic oracles, and reference optima."""

import json
import math

import numpy as np
import pytest

from adastep import (
    ConfigurationError,
    DiagonalQuadraticProblem,
    LibsvmParseError,
    LogisticRegressionProblem,
    err_f_B,
    generate_quadratic,
    load_problem,
    make_rng,
    parse_libsvm,
    quadratic_reference_optimum,
    save_problem,
    serialize_libsvm,
    sigma_f_B,
)
from adastep.problems import problem_content_hash


class TestGenerator:
    @pytest.mark.parametrize("seed", [0, 7, 123])
    def test_strongly_convex_spectrum(self, seed):
        problem = generate_quadratic("strongly_convex", False, n=50, d=100, seed=seed)
        eigs = problem.a.mean(axis=0)
        assert eigs.min() == pytest.approx(1.0, abs=1e-9)
        assert eigs.max() == pytest.approx(10.0, abs=1e-9)
        assert np.all(problem.a > 0)

    @pytest.mark.parametrize("seed", [0, 7])
    def test_general_convex_spectrum(self, seed):
        problem = generate_quadratic("general_convex", False, n=50, d=100, seed=seed)
        eigs = problem.a.mean(axis=0)
        assert eigs.min() == pytest.approx(2.0 ** -20, rel=1e-9)
        np.testing.assert_allclose(eigs[:20], 2.0 ** np.arange(-20, 0), rtol=1e-9)
        assert eigs[-1] == pytest.approx(10.0, rel=1e-9)
        assert np.all(problem.a >= 0)
        # the mask construction keeps every column alive
        assert np.all((problem.a > 0).any(axis=0))

    def test_interpolated_shares_center(self):
        problem = generate_quadratic("strongly_convex", True, n=10, d=30, seed=3)
        assert np.all(problem.b == problem.b[0])
        assert sigma_f_B(problem, 1) == 0.0

    def test_determinism(self):
        a = generate_quadratic("general_convex", False, n=20, d=40, seed=11)
        b = generate_quadratic("general_convex", False, n=20, d=40, seed=11)
        np.testing.assert_array_equal(a.a, b.a)
        np.testing.assert_array_equal(a.b, b.b)

    def test_dimension_validation(self):
        with pytest.raises(ConfigurationError):
            generate_quadratic("general_convex", False, n=5, d=20, seed=0)
        with pytest.raises(ConfigurationError):
            generate_quadratic("diag", False, n=5, d=30, seed=0)


class TestReferenceOptimum:
    def test_interpolated(self):
        problem = generate_quadratic("strongly_convex", True, n=10, d=30, seed=5)
        ref = quadratic_reference_optimum(problem)
        assert ref.f_star == 0.0
        np.testing.assert_array_equal(ref.x_star, problem.b[0])

    def test_two_component(self, two_component_1d):
        ref = quadratic_reference_optimum(two_component_1d)
        assert ref.x_star[0] == pytest.approx(1.0, abs=1e-15)
        assert ref.f_star == pytest.approx(0.5, abs=1e-15)

    def test_gradient_vanishes(self, gc_instance):
        ref = quadratic_reference_optimum(gc_instance)
        assert np.linalg.norm(gc_instance.full_gradient(ref.x_star)) <= 1e-10


class TestBatchMin:
    def test_singleton_zero(self, sc_instance):
        for i in (0, 7, 49):
            assert sc_instance.batch_min(np.array([i])) == 0.0

    def test_two_component(self, two_component_1d):
        assert two_component_1d.batch_min(np.array([0, 1])) == pytest.approx(0.5)

    def test_interpolated_always_zero(self, sc_interp_instance):
        rng = make_rng(0)
        for _ in range(10):
            batch = np.sort(rng.choice(50, size=5, replace=False))
            assert sc_interp_instance.batch_min(batch) == 0.0

    def test_infimum_property(self, gc_instance):
        rng = make_rng(1)
        batch = np.sort(rng.choice(gc_instance.n, size=3, replace=False))
        fmin = gc_instance.batch_min(batch)
        for _ in range(100):
            x = rng.normal(0.0, 5.0, size=gc_instance.dim)
            assert fmin <= gc_instance.batch_value(batch, x) + 1e-9


class TestVarianceConstants:
    def test_two_component_sigma(self, two_component_1d):
        assert sigma_f_B(two_component_1d, 1) == pytest.approx(0.5, abs=1e-15)

    def test_sigma_nonincreasing_in_batch_size(self, sc_instance):
        values = [sigma_f_B(sc_instance, B, sample_count=2000, seed=3)
                  for B in (1, 2, 5)]
        assert values[0] >= values[1] - 1e-9 >= values[2] - 2e-9
        assert all(v >= 0 for v in values)

    def test_err_zero_with_exact_bounds(self, sc_instance):
        assert err_f_B(sc_instance, 1) == pytest.approx(0.0, abs=1e-12)

    def test_err_positive_with_zero_bounds(self, two_component_1d):
        loose = DiagonalQuadraticProblem(
            two_component_1d.a, two_component_1d.b, interpolated=False,
            lb_mode="zero")
        assert err_f_B(loose, 1) == pytest.approx(0.0, abs=1e-15)
        assert err_f_B(loose, 2) == pytest.approx(0.5, abs=1e-15)


class TestLibsvmParser:
    def test_basic_line(self):
        ds = parse_libsvm("+1 3:0.5 7:1.2")
        assert ds.n == 1 and ds.dim == 7
        idx, val = ds.row(0)
        assert idx.tolist() == [2, 6]
        assert val.tolist() == [0.5, 1.2]
        assert ds.labels.tolist() == [1]

    def test_empty_feature_row(self):
        ds = parse_libsvm("-1")
        assert ds.n == 1 and ds.labels.tolist() == [-1]
        idx, _ = ds.row(0)
        assert len(idx) == 0

    def test_zero_label_maps_negative(self):
        assert parse_libsvm("0 1:1.0").labels.tolist() == [-1]

    def test_custom_label_map(self):
        ds = parse_libsvm("3 1:1.0", label_map={3.0: 1, 1.0: -1})
        assert ds.labels.tolist() == [1]

    def test_blank_lines_skipped(self):
        ds = parse_libsvm("+1 1:1.0\n\n-1 2:2.0\n")
        assert ds.n == 2

    def test_round_trip(self, mini_corpus_path):
        first = parse_libsvm(mini_corpus_path)
        second = parse_libsvm(serialize_libsvm(first))
        assert first == second

    @pytest.mark.parametrize("text, line_no, fragment", [
        ("+1 1:1.0\nabc 1:0.5", 2, "label"),
        ("+1 1:1.0\n-1 2:1.0\n2 1:0.5", 3, "label"),
        ("+1 3-0.5", 1, "feature token"),
        ("-1 1:1.0\n+1 3:abc", 2, "feature token"),
        ("+1 3:0.5 2:1.0", 1, "increasing"),
        ("+1 1:1.0\n\n-1 0:0.5", 3, "below 1"),
    ])
    def test_malformed_reports_line(self, text, line_no, fragment):
        with pytest.raises(LibsvmParseError) as err:
            parse_libsvm(text)
        assert err.value.line_no == line_no
        assert fragment in str(err.value)
        assert f"line {line_no}" in str(err.value)


class TestLogisticOracles:
    def _tiny(self):
        return LogisticRegressionProblem(parse_libsvm("+1 1:1.0\n-1 1:2.0 2:-1.0"))

    def test_value_at_origin(self):
        problem = self._tiny()
        x = np.zeros(problem.dim)
        for i in range(problem.n):
            assert problem.batch_value(np.array([i]), x) == pytest.approx(math.log(2.0))

    def test_gradient_at_origin(self):
        problem = self._tiny()
        x = np.zeros(problem.dim)
        grad = problem.batch_gradient(np.array([0]), x)
        np.testing.assert_allclose(grad, [-0.5, 0.0], atol=1e-15)
        grad = problem.batch_gradient(np.array([1]), x)
        np.testing.assert_allclose(grad, [1.0, -0.5], atol=1e-15)

    def test_large_margin_stability(self):
        problem = LogisticRegressionProblem(parse_libsvm("+1 1:1.0"))
        reg = problem.reg
        x = np.array([40.0])
        value = problem.batch_value(np.array([0]), x)
        assert value == pytest.approx(math.log1p(math.exp(-40.0)) + reg * 1600.0,
                                      rel=1e-12)
        x = np.array([-745.0])  # exp would overflow without logaddexp
        value = problem.batch_value(np.array([0]), x)
        assert np.isfinite(value)
        assert value == pytest.approx(745.0 + reg * 745.0 ** 2, rel=1e-12)

    def test_finite_difference_gradient(self, logistic_problem):
        rng = make_rng(2)
        x = rng.normal(0.0, 1.0, size=logistic_problem.dim)
        batch = np.sort(rng.choice(logistic_problem.n, size=16, replace=False))
        grad = logistic_problem.batch_gradient(batch, x)
        direction = rng.normal(size=logistic_problem.dim)
        direction /= np.linalg.norm(direction)
        h = 1e-5
        fd = (logistic_problem.batch_value(batch, x + h * direction)
              - logistic_problem.batch_value(batch, x - h * direction)) / (2 * h)
        assert fd == pytest.approx(float(grad @ direction), rel=1e-6, abs=1e-8)

    def test_loss_nonnegative(self, logistic_problem):
        rng = make_rng(3)
        for _ in range(20):
            x = rng.normal(0.0, 3.0, size=logistic_problem.dim)
            batch = np.sort(rng.choice(logistic_problem.n, size=8, replace=False))
            assert logistic_problem.batch_value(batch, x) >= 0.0
        assert logistic_problem.batch_lower_bound(np.array([0])) == 0.0

    def test_reference_optimum(self, logistic_problem, logistic_reference):
        grad = logistic_problem.full_gradient(logistic_reference.x_star)
        assert np.linalg.norm(grad) <= 1e-8


class TestProblemSerialization:
    def test_round_trip(self, tmp_path, gc_instance):
        path = tmp_path / "instance.json"
        save_problem(gc_instance, path)
        loaded = load_problem(path)
        np.testing.assert_array_equal(loaded.a, gc_instance.a)
        np.testing.assert_array_equal(loaded.b, gc_instance.b)
        assert loaded.regime == gc_instance.regime
        assert loaded.interpolated == gc_instance.interpolated
        assert problem_content_hash(loaded) == problem_content_hash(gc_instance)

    def test_schema_guard(self, tmp_path, two_component_1d):
        path = tmp_path / "instance.json"
        save_problem(two_component_1d, path)
        payload = json.loads(path.read_text())
        payload["schema_version"] = 99
        path.write_text(json.dumps(payload))
        with pytest.raises(ConfigurationError):
            load_problem(path)
