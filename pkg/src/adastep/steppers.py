"""Stepsize engines: Polyak-family, line-search-family, and baselines.

Every stepper is a pure state machine: the runner performs all oracle
calls and feeds the readings in, so evaluation accounting stays
centralized.  Polyak-family steppers share two conventions:

* a reading with zero gradient returns the previous stepsize unchanged
  and the caller skips the parameter update (the iterate already
  minimizes that batch, and the Polyak ratio would be 0/0);
* the guard ``epsilon`` = 1e-10 is added to the square-rooted
  accumulator in the denominator, never to the gradient norm.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .linesearch import LineSearchParams, LineSearchResult
from .problem_core import ConfigurationError

EPSILON_GUARD = 1e-10

# Tiny negative gaps are floating-point noise from evaluating the batch
# value and its closed-form minimum along different code paths.
_GAP_SLACK = 1e-9


class InvalidLowerBoundError(ValueError):
    """The supplied lower bound exceeds the observed minibatch value."""


def polyak_gap(f_batch: float, lower_bound: float) -> float:
    """Validated non-negative gap f_B(x) - l_B."""
    gap = f_batch - lower_bound
    if gap < -_GAP_SLACK * max(1.0, abs(f_batch), abs(lower_bound)):
        raise InvalidLowerBoundError(
            f"minibatch value {f_batch} below its lower bound {lower_bound}"
        )
    return max(gap, 0.0)


def resolve_scale(scale: float, denominator: float) -> tuple[float, bool]:
    """First-iteration calibration c = scale / denominator.

    A vanishing denominator (interpolation already holds at x0) falls
    back to c = scale; the flag reports that the fallback fired.
    """
    if denominator > 0.0:
        return scale / denominator, False
    return scale, True


@dataclass
class AdaSps:
    """Polyak-ratio stepsize with an accumulated gap denominator.

    eta_t = min( gap_t / (c_p * |g_t|^2 * (sqrt(sum_s gap_s) + eps)),
                 eta_{t-1} ),            eta_{-1} = +inf.

    Exactly one of ``c_p`` / ``c_p_scale`` must be given; with
    ``c_p_scale`` the constant resolves on the first reading as
    c_p = c_p_scale / sqrt(gap_0).
    """

    c_p: float | None = None
    c_p_scale: float | None = None
    epsilon: float = EPSILON_GUARD
    accumulator: float = field(default=0.0, init=False)
    eta_prev: float = field(default=math.inf, init=False)
    calibration_fallback: bool = field(default=False, init=False)

    def __post_init__(self):
        if (self.c_p is None) == (self.c_p_scale is None):
            raise ConfigurationError("provide exactly one of c_p / c_p_scale")
        if self.c_p is not None and not self.c_p > 0:
            raise ConfigurationError("c_p must be positive")
        if self.c_p_scale is not None and not self.c_p_scale > 0:
            raise ConfigurationError("c_p_scale must be positive")

    def step(self, f_batch: float, lower_bound: float, grad_sq: float) -> float:
        gap = polyak_gap(f_batch, lower_bound)
        if self.c_p is None:
            self.c_p, self.calibration_fallback = resolve_scale(
                self.c_p_scale, math.sqrt(gap)
            )
        self.accumulator += gap
        if grad_sq <= 0.0:
            return self.eta_prev
        candidate = gap / (
            self.c_p * grad_sq * (math.sqrt(self.accumulator) + self.epsilon)
        )
        self.eta_prev = min(candidate, self.eta_prev)
        return self.eta_prev

    def resolved_constants(self) -> dict:
        return {
            "c_p": self.c_p,
            "c_p_scale": self.c_p_scale,
            "calibration_fallback": self.calibration_fallback,
        }


@dataclass
class AdaSls:
    """Line-search stepsize with an accumulated gamma*|g|^2 denominator.

    eta_t = min( gamma_t / (c_l * (sqrt(sum_s gamma_s |g_s|^2) + eps)),
                 eta_{t-1} ),            eta_{-1} = +inf,

    with gamma_t from backtracking Armijo.  With ``c_l_scale`` the
    constant resolves on the first reading as
    c_l = c_l_scale / (rho * sqrt(gamma_0 |g_0|^2)).
    """

    c_l: float | None = None
    c_l_scale: float | None = None
    params: LineSearchParams = field(default_factory=LineSearchParams)
    epsilon: float = EPSILON_GUARD
    accumulator: float = field(default=0.0, init=False)
    eta_prev: float = field(default=math.inf, init=False)
    calibration_fallback: bool = field(default=False, init=False)

    def __post_init__(self):
        if (self.c_l is None) == (self.c_l_scale is None):
            raise ConfigurationError("provide exactly one of c_l / c_l_scale")
        if self.c_l is not None and not self.c_l > 0:
            raise ConfigurationError("c_l must be positive")
        if self.c_l_scale is not None and not self.c_l_scale > 0:
            raise ConfigurationError("c_l_scale must be positive")

    def step(self, armijo: LineSearchResult, grad_sq: float) -> float:
        increment = armijo.gamma * grad_sq
        if self.c_l is None:
            self.c_l, self.calibration_fallback = resolve_scale(
                self.c_l_scale, self.params.rho * math.sqrt(increment)
            )
        self.accumulator += increment
        if grad_sq <= 0.0:
            return self.eta_prev
        candidate = armijo.gamma / (
            self.c_l * (math.sqrt(self.accumulator) + self.epsilon)
        )
        self.eta_prev = min(candidate, self.eta_prev)
        return self.eta_prev

    def resolved_constants(self) -> dict:
        return {
            "c_l": self.c_l,
            "c_l_scale": self.c_l_scale,
            "rho": self.params.rho,
            "beta": self.params.beta,
            "gamma_max": self.params.gamma_max,
            "calibration_fallback": self.calibration_fallback,
        }


@dataclass
class DecSps:
    """Polyak ratio under a forced 1/sqrt(t+1) decay.

    eta_0 = (1/c_0) min{ gap_0 / |g_0|^2, c_0 * gamma_b } and for t >= 1

        eta_t = (1 / (c_0 sqrt(t+1))) min{ gap_t / |g_t|^2,
                                           c_0 sqrt(t) eta_{t-1} }.
    """

    c_0: float = 1.0
    gamma_b: float = 10.0
    t: int = field(default=0, init=False)
    eta_prev: float = field(init=False)

    def __post_init__(self):
        if not self.c_0 > 0 or not self.gamma_b > 0:
            raise ConfigurationError("c_0 and gamma_b must be positive")
        self.eta_prev = self.gamma_b

    def step(self, f_batch: float, lower_bound: float, grad_sq: float) -> float:
        gap = polyak_gap(f_batch, lower_bound)
        if grad_sq <= 0.0:
            self.t += 1
            return self.eta_prev
        ratio = gap / grad_sq
        c_now = self.c_0 * math.sqrt(self.t + 1)
        c_before = self.c_0 * math.sqrt(self.t) if self.t >= 1 else self.c_0
        self.eta_prev = min(ratio, c_before * self.eta_prev) / c_now
        self.t += 1
        return self.eta_prev

    def resolved_constants(self) -> dict:
        return {"c_0": self.c_0, "gamma_b": self.gamma_b}


@dataclass
class Sps:
    """Classical stochastic Polyak stepsize (f*_B - gap)/(c |g|^2).

    ``c`` = 0.5 reproduces the usual factor 2; a finite ``gamma_b``
    gives the capped variant.  Requires the exact minibatch optimum.
    """

    c: float = 0.5
    gamma_b: float | None = None
    eta_prev: float = field(default=0.0, init=False)

    def __post_init__(self):
        if not self.c > 0:
            raise ConfigurationError("c must be positive")
        if self.gamma_b is not None and not self.gamma_b > 0:
            raise ConfigurationError("gamma_b must be positive")

    def step(self, f_batch: float, f_star_batch: float | None, grad_sq: float) -> float:
        if f_star_batch is None:
            raise ConfigurationError("the Polyak stepsize needs the exact minibatch optimum")
        gap = polyak_gap(f_batch, f_star_batch)
        if grad_sq <= 0.0:
            return self.eta_prev
        eta = gap / (self.c * grad_sq)
        if self.gamma_b is not None:
            eta = min(eta, self.gamma_b)
        self.eta_prev = eta
        return eta

    def resolved_constants(self) -> dict:
        return {"c": self.c, "gamma_b": self.gamma_b}


@dataclass
class Sls:
    """Raw Armijo step: eta_t = gamma_t."""

    params: LineSearchParams = field(
        default_factory=lambda: LineSearchParams(beta=0.9, rho=0.1)
    )

    def step(self, armijo: LineSearchResult) -> float:
        return armijo.gamma

    def resolved_constants(self) -> dict:
        return {"rho": self.params.rho, "beta": self.params.beta,
                "gamma_max": self.params.gamma_max}


@dataclass
class AdaGradNorm:
    """Scalar adaptive stepsize eta_t = c_g / sqrt(sum_s |g_s|^2 + b_0^2).

    A fully degenerate denominator (b_0 = 0 and no gradient signal yet)
    is guarded by ``epsilon``; the update is zero in that case anyway.
    """

    c_g: float = 1.0
    b_0: float = 0.0
    epsilon: float = EPSILON_GUARD
    accumulator: float = field(default=0.0, init=False)

    def __post_init__(self):
        if not self.c_g > 0:
            raise ConfigurationError("c_g must be positive")
        if self.b_0 < 0:
            raise ConfigurationError("b_0 must be non-negative")

    def step(self, grad_sq: float) -> float:
        self.accumulator += grad_sq
        denom = math.sqrt(self.accumulator + self.b_0 ** 2)
        if denom == 0.0:
            denom = self.epsilon
        return self.c_g / denom

    def resolved_constants(self) -> dict:
        return {"c_g": self.c_g, "b_0": self.b_0}


SGD_SCHEDULES = ("constant", "inv_sqrt", "inv_t")


def sgd_schedule_step(kind: str, eta0: float, t: int) -> float:
    """Fixed schedules: eta0, eta0/sqrt(t+1), or eta0/(t+1)."""
    if kind == "constant":
        return eta0
    if kind == "inv_sqrt":
        return eta0 / math.sqrt(t + 1)
    if kind == "inv_t":
        return eta0 / (t + 1)
    raise ConfigurationError(f"unknown schedule kind {kind!r}")


@dataclass
class SgdSchedule:
    """Scheduled SGD stepsize with an internal iteration counter."""

    kind: str = "constant"
    eta0: float = 1.0
    t: int = field(default=0, init=False)

    def __post_init__(self):
        if self.kind not in SGD_SCHEDULES:
            raise ConfigurationError(f"unknown schedule kind {self.kind!r}")
        if not self.eta0 > 0:
            raise ConfigurationError("eta0 must be positive")

    def step(self) -> float:
        eta = sgd_schedule_step(self.kind, self.eta0, self.t)
        self.t += 1
        return eta

    def resolved_constants(self) -> dict:
        return {"kind": self.kind, "eta0": self.eta0}


@dataclass
class AdaSpsDl:
    """Restarting variant: every ``update_freq`` steps the constant is
    recomputed as c_p = c_p_scale / sqrt(accumulated gap) and the
    clamp against eta_{t-1} is dropped, allowing the stepsize to grow
    again between epochs.  Off-restart steps behave exactly like
    :class:`AdaSps`.
    """

    c_p_scale: float = 1.0
    update_freq: int = 1
    epsilon: float = EPSILON_GUARD
    t: int = field(default=0, init=False)
    c_p: float | None = field(default=None, init=False)
    accumulator: float = field(default=0.0, init=False)
    eta_prev: float = field(default=math.inf, init=False)

    def __post_init__(self):
        if not self.c_p_scale > 0:
            raise ConfigurationError("c_p_scale must be positive")
        if self.update_freq < 1:
            raise ConfigurationError("update_freq must be at least 1")

    def step(self, f_batch: float, lower_bound: float, grad_sq: float) -> float:
        gap = polyak_gap(f_batch, lower_bound)
        self.accumulator += gap
        restart = self.t % self.update_freq == 0
        if restart:
            self.c_p, _ = resolve_scale(self.c_p_scale, math.sqrt(self.accumulator))
        self.t += 1
        if grad_sq <= 0.0:
            return self.eta_prev
        candidate = gap / (
            self.c_p * grad_sq * (math.sqrt(self.accumulator) + self.epsilon)
        )
        self.eta_prev = candidate if restart else min(candidate, self.eta_prev)
        return self.eta_prev

    def resolved_constants(self) -> dict:
        return {"c_p_scale": self.c_p_scale, "update_freq": self.update_freq,
                "c_p": self.c_p}
