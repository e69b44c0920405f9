"""Loopless variance reduction via proxy functions.

A snapshot (w, grad f(w)) anchors a per-iteration proxy

    F_B(x) = f_B(x) + x^T g + (mu_F/2) ||x - x_t||^2,
    g = grad f(w) - grad f_B(w),

which is unbiased at the anchor (E_B grad F_B(x_t) = grad f(x_t)) and
whose suboptimality vanishes as w, x_t approach the solution, restoring
an interpolation-like regime for Polyak/line-search stepsizes.  The
snapshot refreshes to the current iterate with probability p_{t+1},
either constant or decreasing as 1/(a t + 1).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .problem_core import ConfigurationError, CountingOracle, FiniteSumProblem
from .problems import DiagonalQuadraticProblem


@dataclass(frozen=True)
class Snapshot:
    """Anchor point and its full gradient, updated atomically."""

    w: np.ndarray
    full_grad: np.ndarray

    @classmethod
    def create(cls, oracle: CountingOracle, w: np.ndarray) -> "Snapshot":
        return cls(w=w.copy(), full_grad=oracle.full_gradient(w))


def snapshot_correction(problem: FiniteSumProblem, snapshot: Snapshot,
                        batch: np.ndarray) -> np.ndarray:
    """g = grad f(w) - grad f_B(w) for the current batch.

    The component gradients at w were all evaluated (and paid for) when
    the snapshot was created, so reading one back is a cache hit and is
    not metered.
    """
    return snapshot.full_grad - problem.batch_gradient(batch, snapshot.w)


@dataclass(frozen=True)
class ProxyFunction:
    """F(x) = f_B(x) + x^T correction + (mu_f/2) ||x - anchor||^2.

    ``base_value``/``base_gradient`` evaluate the underlying minibatch
    function; bind them to a counting oracle so probe costs are metered.
    """

    base_value: Callable[[np.ndarray], float]
    base_gradient: Callable[[np.ndarray], np.ndarray]
    correction: np.ndarray
    anchor: np.ndarray
    mu_f: float

    def value(self, x: np.ndarray) -> float:
        diff = x - self.anchor
        return (self.base_value(x) + float(x @ self.correction)
                + 0.5 * self.mu_f * float(diff @ diff))

    def gradient(self, x: np.ndarray) -> np.ndarray:
        return self.base_gradient(x) + self.correction + self.mu_f * (x - self.anchor)

    def lower_bound(self, base_lb: float) -> float:
        """Closed-form bound <= inf F: shift base_lb by the exact minimum
        of the added terms, attained at x = anchor - correction/mu_f."""
        corr_sq = float(self.correction @ self.correction)
        if self.mu_f <= 0.0:
            if corr_sq == 0.0:
                return base_lb
            raise ConfigurationError(
                "proxy lower bound needs mu_f > 0 (shift term unbounded below)"
            )
        return base_lb + float(self.anchor @ self.correction) - corr_sq / (2.0 * self.mu_f)


@dataclass(frozen=True)
class ProbabilitySchedule:
    """Snapshot refresh probability p_t = 1/(a t + 1), or a constant."""

    a: float = 0.0
    fixed_p: float | None = None

    def __post_init__(self):
        if not 0.0 <= self.a < 1.0:
            raise ConfigurationError(f"decay rate a must be in [0, 1), got {self.a}")
        if self.fixed_p is not None and not 0.0 < self.fixed_p <= 1.0:
            raise ConfigurationError(f"fixed_p must be in (0, 1], got {self.fixed_p}")

    def probability(self, t: int) -> float:
        if self.fixed_p is not None:
            return self.fixed_p
        return 1.0 / (self.a * t + 1.0)


def snapshot_update(snapshot: Snapshot, x_t: np.ndarray, t: int,
                    schedule: ProbabilitySchedule, rng: np.random.Generator,
                    oracle: CountingOracle) -> tuple[Snapshot, bool]:
    """Refresh to (x_t, grad f(x_t)) with probability p_{t+1}.

    Note the refresh anchors at the pre-update iterate x_t.  Returns the
    (possibly unchanged) snapshot and whether a refresh happened.
    """
    if rng.random() < schedule.probability(t + 1):
        return Snapshot.create(oracle, x_t), True
    return snapshot, False


def quadratic_proxy_min(problem: DiagonalQuadraticProblem, batch: np.ndarray,
                        correction: np.ndarray, anchor: np.ndarray,
                        mu_f: float) -> float:
    """Exact inf F for a diagonal-quadratic base batch (per coordinate)."""
    a_bar = problem.a[batch].mean(axis=0)
    ab_bar = (problem.a[batch] * problem.b[batch]).mean(axis=0)
    abb_bar = (problem.a[batch] * problem.b[batch] ** 2).mean(axis=0)
    curv = a_bar + mu_f
    slope = correction - ab_bar - mu_f * anchor
    const = 0.5 * abb_bar + 0.5 * mu_f * anchor ** 2
    flat = curv <= 0.0
    if np.any(flat & (slope != 0.0)):
        raise ConfigurationError("proxy batch function is unbounded below")
    total = const.sum()
    active = ~flat
    total -= (slope[active] ** 2 / (2.0 * curv[active])).sum()
    return float(total)
