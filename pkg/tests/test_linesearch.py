"""Backtracking line-search behavior and bounds."""

import math

import numpy as np
import pytest

from adastep import (
    ConfigurationError,
    LineSearchError,
    LineSearchParams,
    backtracking_armijo,
)


def quadratic_1d(curvature=1.0):
    value = lambda z: 0.5 * curvature * float(z @ z)
    grad = lambda z: curvature * z
    return value, grad


class TestBacktracking:
    def test_hand_iterated_example(self):
        # f(x) = x^2/2 at x = 1 accepts exactly at gamma <= 1, reached
        # after 11 halvings-by-0.8 from gamma_max = 10
        value, grad = quadratic_1d()
        x = np.array([1.0])
        g = grad(x)
        result = backtracking_armijo(
            value, x, g, value(x), float(g @ g),
            LineSearchParams(beta=0.8, rho=0.5, gamma_max=10.0))
        assert result.probes == 12
        assert result.gamma == pytest.approx(10.0 * 0.8 ** 11, rel=1e-15)

    def test_immediate_accept_below_smoothness_threshold(self):
        # gamma_max <= (1 - rho)/L is always accepted on an L-smooth function
        value, grad = quadratic_1d(curvature=1.0)
        x = np.array([3.0])
        g = grad(x)
        result = backtracking_armijo(
            value, x, g, value(x), float(g @ g),
            LineSearchParams(beta=0.8, rho=0.5, gamma_max=0.4))
        assert result.probes == 1
        assert result.gamma == 0.4

    @pytest.mark.parametrize("curvature", [0.3, 1.0, 4.0, 25.0])
    @pytest.mark.parametrize("gamma_max", [0.05, 1.0, 10.0])
    def test_lower_bound_and_probe_cap(self, curvature, gamma_max):
        value, grad = quadratic_1d(curvature)
        params = LineSearchParams(beta=0.8, rho=0.5, gamma_max=gamma_max)
        x = np.array([1.7, -0.4])
        g = grad(x)
        result = backtracking_armijo(value, x, g, value(x), float(g @ g), params)
        floor = min((1 - params.rho) / curvature, gamma_max)
        assert result.gamma >= floor * (1 - 1e-12)
        bound = max(math.ceil(math.log(curvature * gamma_max / (1 - params.rho))
                              / math.log(1 / params.beta)), 1) + 1
        assert result.probes <= bound

    def test_postcondition_reverified(self):
        # re-check the sufficient-decrease inequality with a fresh evaluation
        rng = np.random.default_rng(4)
        for _ in range(25):
            curvature = float(rng.uniform(0.1, 20.0))
            value, grad = quadratic_1d(curvature)
            x = rng.normal(0.0, 2.0, size=3)
            g = grad(x)
            gsq = float(g @ g)
            params = LineSearchParams(beta=0.8, rho=0.5, gamma_max=10.0)
            result = backtracking_armijo(value, x, g, value(x), gsq, params)
            assert value(x - result.gamma * g) <= value(x) - params.rho * result.gamma * gsq

    def test_deterministic(self):
        value, grad = quadratic_1d(2.0)
        x = np.array([0.9])
        g = grad(x)
        args = (value, x, g, value(x), float(g @ g),
                LineSearchParams(beta=0.9, rho=0.1, gamma_max=10.0))
        first = backtracking_armijo(*args)
        second = backtracking_armijo(*args)
        assert (first.gamma, first.probes) == (second.gamma, second.probes)

    def test_probe_cap_error(self):
        never_decreasing = lambda z: 1e9
        x = np.array([1.0])
        with pytest.raises(LineSearchError):
            backtracking_armijo(never_decreasing, x, x, 0.0, 1.0,
                                LineSearchParams(max_probes=20))

    def test_zero_gradient_rejected(self):
        value, _ = quadratic_1d()
        with pytest.raises(ConfigurationError):
            backtracking_armijo(value, np.zeros(1), np.zeros(1), 0.0, 0.0,
                                LineSearchParams())


class TestParams:
    def test_beta_range(self):
        with pytest.raises(ConfigurationError):
            LineSearchParams(beta=0.4)
        with pytest.raises(ConfigurationError):
            LineSearchParams(beta=1.0)
        LineSearchParams(beta=0.5)

    def test_rho_and_gamma(self):
        with pytest.raises(ConfigurationError):
            LineSearchParams(rho=0.0)
        with pytest.raises(ConfigurationError):
            LineSearchParams(gamma_max=0.0)
