"""Run diagnostics: variance constants, convergence-bound constants, and
the bounded-iterates radius for strongly convex instances."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .problem_core import ConfigurationError, FiniteSumProblem
from .problems import (
    DiagonalQuadraticProblem,
    LogisticRegressionProblem,
    ReferenceOptimum,
    _iter_batches,
    err_f_B,
    sigma_f_B,
)
from .runner import _initial_point, reference_for
from .trace import Trace


@dataclass(frozen=True)
class DiagnosticsReport:
    """Problem/run constants; fields are None when not computable for the
    problem or algorithm at hand (e.g. no exact minibatch optima)."""

    sigma_fb: float | None
    err_fb: float | None
    theorem_bound: float | None   # tau_p (adasps) or tau_l (adasls)
    dmax_bound: float | None
    smoothness: float
    smoothness_exact: bool
    containment_ok: bool | None   # all recorded |x_t - x*|^2 <= dmax_bound


def _strong_convexity(problem: FiniteSumProblem) -> float | None:
    if isinstance(problem, DiagonalQuadraticProblem):
        mu = problem.strong_convexity_constant()
        return mu if mu > 0 else None
    if isinstance(problem, LogisticRegressionProblem):
        return 2.0 * problem.reg
    return None


def _sigma_max(problem: FiniteSumProblem, batch_size: int,
               x_star: np.ndarray, use_batch_min: bool,
               sample_count: int, seed: int) -> float | None:
    """max over batches of f_B(x*) - target, target = f*_B or l*_B."""
    worst = -math.inf
    for batch in _iter_batches(problem.n, batch_size, 10_000, sample_count, seed):
        if use_batch_min:
            target = problem.batch_min(batch)
            if target is None:
                return None
        else:
            target = problem.batch_lower_bound(batch)
        worst = max(worst, problem.batch_value(batch, x_star) - target)
    return worst


def dmax_bound(problem: FiniteSumProblem, batch_size: int, trace: Trace,
               reference: ReferenceOptimum, sample_count: int = 2000,
               seed: int = 0) -> float | None:
    """Bounded-iterates radius max{|x0-x*|^2, (2 s + b)/mu, (2 s + b) eta_0}
    with s the worst batch gap at the optimum; strongly convex runs of
    the two accumulator-based steppers only."""
    mu = _strong_convexity(problem)
    algorithm = trace.header["algorithm"]
    first = trace.header.get("first_readings") or {}
    constants = trace.header.get("resolved_constants", {})
    if mu is None or first.get("eta") is None:
        return None
    if algorithm == "adasps":
        c_p = constants["c_p"]
        gap0 = first["f_batch"] - first["lower_bound"]
        if gap0 <= 0:
            return None
        b = 1.0 / (4.0 * c_p ** 3 * math.sqrt(gap0))
        s = _sigma_max(problem, batch_size, reference.x_star,
                       use_batch_min=False, sample_count=sample_count, seed=seed)
    elif algorithm == "adasls":
        c_l, rho = constants["c_l"], constants["rho"]
        inc0 = first["gamma"] * first["grad_sq"]
        if inc0 <= 0:
            return None
        b = 1.0 / (4.0 * c_l ** 3 * rho ** 2 * math.sqrt(inc0))
        s = _sigma_max(problem, batch_size, reference.x_star,
                       use_batch_min=True, sample_count=sample_count, seed=seed)
    else:
        return None
    if s is None:
        return None
    x0 = _initial_point(trace.header["config"]["x0"], problem.dim,
                        trace.header["config"]["seed"])
    dist0 = float(np.sum((x0 - reference.x_star) ** 2))
    eta0 = first["eta"]
    return max(dist0, (2.0 * s + b) / mu, (2.0 * s + b) * eta0)


def theorem_bound(trace: Trace, smoothness: float,
                  diameter_sq: float | None) -> float | None:
    """Convergence-bound constant: tau_p = 2 c_p L D^2 + 1/c_p for the
    gap-accumulating stepper, its line-search analogue otherwise."""
    if diameter_sq is None:
        return None
    algorithm = trace.header["algorithm"]
    constants = trace.header.get("resolved_constants", {})
    if algorithm == "adasps":
        c_p = constants["c_p"]
        return 2.0 * c_p * smoothness * diameter_sq + 1.0 / c_p
    if algorithm == "adasls":
        c_l, rho = constants["c_l"], constants["rho"]
        gamma_max = constants["gamma_max"]
        lead = max(smoothness / ((1.0 - rho) * math.sqrt(rho)),
                   1.0 / (gamma_max * math.sqrt(rho)))
        return lead * c_l * diameter_sq + 1.0 / (c_l * math.sqrt(rho))
    return None


def compute_diagnostics(problem: FiniteSumProblem, batch_size: int, trace: Trace,
                        reference: ReferenceOptimum | None = None,
                        sample_count: int = 2000, seed: int = 0) -> DiagnosticsReport:
    if reference is None:
        reference = reference_for(problem)
    try:
        sigma = sigma_f_B(problem, batch_size, sample_count, seed, reference)
    except ConfigurationError:
        sigma = None
    err = err_f_B(problem, batch_size, sample_count, seed)
    L, L_exact = problem.smoothness_constant()

    dmax = dmax_bound(problem, batch_size, trace, reference,
                      sample_count=sample_count, seed=seed)
    projection = trace.header.get("projection", {})
    if projection.get("kind") == "euclidean_ball":
        diameter_sq = (2.0 * projection["radius"]) ** 2
    else:
        diameter_sq = dmax
    bound = theorem_bound(trace, L, diameter_sq)

    containment = None
    if dmax is not None:
        dists = [r.dist_sq for r in trace.records if r.dist_sq is not None]
        if dists:
            containment = max(dists) <= dmax * (1.0 + 1e-9)

    return DiagnosticsReport(
        sigma_fb=sigma, err_fb=err, theorem_bound=bound, dmax_bound=dmax,
        smoothness=L, smoothness_exact=L_exact, containment_ok=containment,
    )
