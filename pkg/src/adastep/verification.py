"""Exact-identity and property check suites, runnable from the CLI.

The first two checks reproduce, by exact two-term enumeration, why
naive Polyak-style stepsizes break under variance reduction on the pair
f_1(x) = a_1 (x-1)^2, f_2(x) = a_2 (x+1)^2: the expected step blows up
as a_2 -> 0, and the intuitive "corrected-denominator" variant has a
nonzero expected displacement at every x != 0.  These constructions are
deliberately not part of the optimizer API.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .problem_core import ProjectionDomain, make_rng, project


def expected_naive_polyak_step(a2: float, x: float, a1: float = 1.0) -> float:
    """E_i[(f_i(x) - f_i*)/|f_i'(x)|^2] over the two-component pair.

    At x = 0 with a1 = 1 this equals 1/8 + 1/(8 a2), unbounded in the
    flat component's curvature.
    """
    total = 0.0
    for a, center in ((a1, 1.0), (a2, -1.0)):
        value = a * (x - center) ** 2
        grad = 2.0 * a * (x - center)
        total += value / grad ** 2
    return total / 2.0


def expected_mismatched_displacement(x: float) -> float:
    """E_i[eta_i] * f'(x) for eta_i = f_i(x)/|f'(x)|^2 with a1 = a2 = 1.

    This is the "freeze the anchor at the iterate" variant: the
    variance-reduced direction collapses to the full gradient while the
    numerator keeps the biased component value, giving the closed form
    (x^2 + 1)/(2x) -- no stationary point anywhere.
    """
    full_grad = 2.0 * x  # mean of 2(x-1) and 2(x+1)
    etas = [(x - 1.0) ** 2 / full_grad ** 2, (x + 1.0) ** 2 / full_grad ** 2]
    return (sum(etas) / 2.0) * full_grad


def accumulator_sum_bounds(values: np.ndarray) -> tuple[float, float, float]:
    """(sqrt(S), sum_t a_t / sqrt(partial_t), 2 sqrt(S)) for non-negative a.

    The middle quantity is the per-step denominator work an accumulator
    stepper performs; it is always sandwiched by the outer two.
    """
    values = np.asarray(values, dtype=float)
    partials = np.cumsum(values)
    total = math.sqrt(partials[-1]) if partials[-1] > 0 else 0.0
    mid = 0.0
    for a_t, partial in zip(values, partials):
        if a_t > 0:
            mid += a_t / math.sqrt(partial)
    return total, mid, 2.0 * total


def quadratic_growth_bound(a: float, b: float, x: float) -> bool:
    """x^2 <= a(x+b) implies x <= a + sqrt(ab) (all non-negative)."""
    if x * x > a * (x + b):
        return True  # premise false, implication holds vacuously
    return x <= a + math.sqrt(a * b) + 1e-12 * max(1.0, a, b)


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str


def run_verification(trials: int = 1000, seed: int = 0) -> list[CheckResult]:
    """The full identity/property suite behind ``adastep verify``."""
    results = []

    worst = 0.0
    for a2 in (1.0, 0.1, 0.01):
        expected = 1.0 / 8.0 + 1.0 / (8.0 * a2)
        worst = max(worst, abs(expected_naive_polyak_step(a2, 0.0) - expected))
    results.append(CheckResult(
        "naive-polyak-expected-step", worst <= 1e-12,
        f"max deviation {worst:.3e} (tol 1e-12)"))

    worst = 0.0
    for x in (1.0, 2.0, -3.0):
        expected = (x * x + 1.0) / (2.0 * x)
        worst = max(worst, abs(expected_mismatched_displacement(x) - expected))
    results.append(CheckResult(
        "mismatched-variant-displacement", worst <= 1e-12,
        f"max deviation {worst:.3e} (tol 1e-12)"))

    rng = make_rng(seed, stream=11)
    ok = True
    for _ in range(trials):
        length = int(rng.integers(1, 50))
        values = rng.uniform(0.0, 10.0, size=length)
        if rng.random() < 0.2:
            values[rng.random(length) < 0.3] = 0.0
        lo, mid, hi = accumulator_sum_bounds(values)
        slack = 1e-12 * max(1.0, hi)
        ok = ok and (lo - slack <= mid <= hi + slack)
    results.append(CheckResult(
        "accumulator-sum-sandwich", ok, f"{trials} random sequences"))

    ok = True
    for _ in range(trials):
        a = rng.uniform(0.0, 10.0)
        b = rng.uniform(0.0, 10.0)
        x_max = (a + math.sqrt(a * a + 4.0 * a * b)) / 2.0
        x = rng.uniform(0.0, 1.0) * x_max
        ok = ok and quadratic_growth_bound(a, b, x)
    results.append(CheckResult(
        "quadratic-growth-bound", ok, f"{trials} random triples"))

    domain = ProjectionDomain(kind="euclidean_ball", center=0.0, radius=1.5)
    ok = True
    for _ in range(trials):
        d = int(rng.integers(1, 8))
        x = rng.normal(0.0, 3.0, size=d)
        y = rng.normal(0.0, 3.0, size=d)
        px, py = project(domain, x), project(domain, y)
        ok = ok and np.allclose(project(domain, px), px, rtol=0, atol=1e-12)
        ok = ok and (np.linalg.norm(px - py)
                     <= np.linalg.norm(x - y) + 1e-12)
    results.append(CheckResult(
        "projection-idempotent-nonexpansive", ok, f"{trials} random pairs"))

    return results
