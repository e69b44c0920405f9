"""Finite-sum problem abstraction, minibatch sampling, and oracle accounting.

A problem is a collection of n component functions f_i whose average
f(x) = (1/n) sum_i f_i(x) is minimized over R^d (optionally over a
Euclidean ball).  Algorithms never talk to a problem directly: they go
through a :class:`CountingOracle` that meters every evaluation, so the
cost of a run can be audited exactly as

    total gradient cost = stochastic_grad_evals + n * full_grad_evals.
"""

from __future__ import annotations

import abc
from dataclasses import dataclass, field

import numpy as np


class ConfigurationError(ValueError):
    """Invalid problem/run configuration (bad batch size, unknown key, ...)."""


class NonFiniteOracleError(RuntimeError):
    """An oracle produced NaN/Inf; the run must abort with a diagnostic."""


def as_params(x) -> np.ndarray:
    """Coerce to a float64 parameter vector."""
    return np.asarray(x, dtype=np.float64)


def check_finite(value, what: str):
    """Raise :class:`NonFiniteOracleError` if ``value`` contains NaN/Inf."""
    if not np.all(np.isfinite(value)):
        raise NonFiniteOracleError(f"non-finite {what} encountered")
    return value


@dataclass
class OracleCounters:
    """Monotone evaluation counters owned by a single run.

    ``full_grad_evals`` counts full-gradient computations, each worth n
    stochastic evaluations; ``function_evals`` counts minibatch value
    queries (line-search probes included) and does not enter the
    gradient cost.
    """

    stochastic_grad_evals: int = 0
    full_grad_evals: int = 0
    function_evals: int = 0

    def gradient_cost(self, n: int) -> int:
        return self.stochastic_grad_evals + n * self.full_grad_evals

    def snapshot(self) -> dict:
        return {
            "stochastic_grad_evals": self.stochastic_grad_evals,
            "full_grad_evals": self.full_grad_evals,
            "function_evals": self.function_evals,
        }


class FiniteSumProblem(abc.ABC):
    """Oracle over n smooth components; raw (uncounted) evaluations.

    Batches are arrays of distinct component indices; the minibatch
    function is the plain average f_B(x) = (1/|B|) sum_{i in B} f_i(x).
    """

    n: int
    dim: int

    @abc.abstractmethod
    def batch_value(self, batch: np.ndarray, x: np.ndarray) -> float:
        ...

    @abc.abstractmethod
    def batch_gradient(self, batch: np.ndarray, x: np.ndarray) -> np.ndarray:
        ...

    def full_value(self, x: np.ndarray) -> float:
        return self.batch_value(np.arange(self.n), x)

    def full_gradient(self, x: np.ndarray) -> np.ndarray:
        return self.batch_gradient(np.arange(self.n), x)

    def batch_lower_bound(self, batch: np.ndarray) -> float:
        """A bound l <= inf_x f_B(x).  Zero for non-negative losses."""
        return 0.0

    def batch_min(self, batch: np.ndarray) -> float | None:
        """Exact inf_x f_B(x) when available in closed form, else None."""
        return None

    def smoothness_constant(self) -> tuple[float, bool]:
        """(L, exact) with every f_i L-smooth; exact=False marks a bound."""
        raise NotImplementedError

    def _check_dim(self, x: np.ndarray):
        if x.shape != (self.dim,):
            raise ConfigurationError(
                f"parameter vector has shape {x.shape}, expected ({self.dim},)"
            )


@dataclass
class MinibatchSampler:
    """Seeded sampler of uniform size-B index subsets of [0, n).

    Uses the PCG64 generator so that identical (seed, call sequence)
    pairs reproduce the identical index sequence on any platform.
    Batches are independent across calls and returned in sorted order.
    """

    n: int
    batch_size: int
    seed: int
    stream: int = 0
    _rng: np.random.Generator = field(init=False, repr=False)

    def __post_init__(self):
        if not 1 <= self.batch_size <= self.n:
            raise ConfigurationError(
                f"batch size {self.batch_size} not in [1, n={self.n}]"
            )
        self._rng = make_rng(self.seed, self.stream)

    def sample(self) -> np.ndarray:
        batch = self._rng.choice(self.n, size=self.batch_size, replace=False)
        batch.sort()
        return batch


def make_rng(seed: int, stream: int = 0) -> np.random.Generator:
    """Independent, reproducible PCG64 stream derived from (seed, stream)."""
    return np.random.Generator(
        np.random.PCG64(np.random.SeedSequence(entropy=seed, spawn_key=(stream,)))
    )


@dataclass(frozen=True)
class ProjectionDomain:
    """Feasible set: all of R^d, or a Euclidean ball of diameter 2*radius."""

    kind: str = "unconstrained"  # "unconstrained" | "euclidean_ball"
    center: np.ndarray | float = 0.0
    radius: float = 0.0

    def __post_init__(self):
        if self.kind not in ("unconstrained", "euclidean_ball"):
            raise ConfigurationError(f"unknown projection kind {self.kind!r}")
        if self.kind == "euclidean_ball" and not self.radius > 0:
            raise ConfigurationError("ball radius must be positive")

    @property
    def diameter(self) -> float:
        return 2.0 * self.radius


def project(domain: ProjectionDomain, x: np.ndarray) -> np.ndarray:
    """Euclidean projection onto the domain (identity when unconstrained)."""
    if domain.kind == "unconstrained":
        return x
    center = np.broadcast_to(as_params(domain.center), x.shape)
    offset = x - center
    norm = float(np.linalg.norm(offset))
    if norm <= domain.radius:
        return x
    return center + offset * (domain.radius / norm)


class CountingOracle:
    """Metered view of a problem, owned by one run.

    Every result is finiteness-checked so a numerical blow-up aborts
    immediately instead of silently corrupting a trace.
    """

    def __init__(self, problem: FiniteSumProblem, counters: OracleCounters | None = None):
        self.problem = problem
        self.counters = counters if counters is not None else OracleCounters()

    @property
    def n(self) -> int:
        return self.problem.n

    def minibatch_value(self, batch: np.ndarray, x: np.ndarray) -> float:
        self.problem._check_dim(x)
        self.counters.function_evals += 1
        return check_finite(self.problem.batch_value(batch, x), "minibatch value")

    def minibatch_gradient(self, batch: np.ndarray, x: np.ndarray) -> np.ndarray:
        self.problem._check_dim(x)
        self.counters.stochastic_grad_evals += len(batch)
        return check_finite(self.problem.batch_gradient(batch, x), "minibatch gradient")

    def full_gradient(self, x: np.ndarray) -> np.ndarray:
        self.problem._check_dim(x)
        self.counters.full_grad_evals += 1
        return check_finite(self.problem.full_gradient(x), "full gradient")

    def batch_lower_bound(self, batch: np.ndarray) -> float:
        return self.problem.batch_lower_bound(batch)

    def gradient_cost(self) -> int:
        return self.counters.gradient_cost(self.problem.n)
