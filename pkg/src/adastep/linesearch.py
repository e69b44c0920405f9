"""Backtracking Armijo line search with function-evaluation accounting."""

from __future__ import annotations

from dataclasses import dataclass

from .problem_core import ConfigurationError


class LineSearchError(RuntimeError):
    """Backtracking failed to terminate within the probe cap."""


@dataclass(frozen=True)
class LineSearchParams:
    """Backtracking parameters.

    ``beta`` must lie in [1/2, 1): halving at most per trial is what
    guarantees the accepted scale stays above min{(1-rho)/L, gamma_max}
    on smooth functions.
    """

    beta: float = 0.8
    rho: float = 0.5
    gamma_max: float = 10.0
    max_probes: int = 200

    def __post_init__(self):
        if not 0.5 <= self.beta < 1.0:
            raise ConfigurationError(f"beta must be in [0.5, 1), got {self.beta}")
        if not 0.0 < self.rho < 1.0:
            raise ConfigurationError(f"rho must be in (0, 1), got {self.rho}")
        if not self.gamma_max > 0.0:
            raise ConfigurationError(f"gamma_max must be positive, got {self.gamma_max}")
        if self.max_probes < 1:
            raise ConfigurationError("max_probes must be at least 1")


@dataclass(frozen=True)
class LineSearchResult:
    gamma: float
    probes: int


def backtracking_armijo(value_oracle, x, direction, f_at_x: float,
                        grad_sq: float, params: LineSearchParams) -> LineSearchResult:
    """Largest gamma_max * beta^k satisfying the sufficient-decrease test

        value_oracle(x - gamma * direction) <= f_at_x - rho * gamma * grad_sq,

    where ``direction`` is the minibatch gradient and ``grad_sq`` its
    squared norm (both supplied by the caller so the search costs only
    the probe evaluations).  Ties accept: the comparison is a plain <=
    with no epsilon slack.  Each probe is one function evaluation on the
    caller's oracle.
    """
    if not grad_sq > 0.0:
        raise ConfigurationError("line search requires a nonzero gradient")
    gamma = params.gamma_max
    for probe in range(1, params.max_probes + 1):
        if value_oracle(x - gamma * direction) <= f_at_x - params.rho * gamma * grad_sq:
            return LineSearchResult(gamma=gamma, probes=probe)
        gamma *= params.beta
    raise LineSearchError(
        f"no acceptable step within {params.max_probes} probes "
        "(non-smooth objective or inconsistent oracle?)"
    )
