"""Experiment configuration and the deterministic run loop.

An :class:`ExperimentConfig` fully determines a run: problem, algorithm
and hyperparameters, batch size, gradient-evaluation budget (in
epoch-equivalents), seed, projection domain, and trace cadence.  The
runner owns all oracle calls; steppers only see scalar readings.

Budgets are denominated in gradient evaluations so variance-reduced and
plain methods compare fairly: the loop stops as soon as the metered
cost reaches ``budget_epochs * n`` (overshooting by at most one
iteration's worth, n + B).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .linesearch import LineSearchParams, backtracking_armijo
from .problem_core import (
    ConfigurationError,
    CountingOracle,
    FiniteSumProblem,
    MinibatchSampler,
    NonFiniteOracleError,
    ProjectionDomain,
    make_rng,
    project,
)
from .problems import (
    DiagonalQuadraticProblem,
    LogisticRegressionProblem,
    ReferenceOptimum,
    generate_quadratic,
    load_problem,
    logistic_reference_optimum,
    parse_libsvm,
    problem_content_hash,
    quadratic_reference_optimum,
)
from .steppers import (
    AdaGradNorm,
    AdaSls,
    AdaSps,
    AdaSpsDl,
    DecSps,
    SgdSchedule,
    Sls,
    Sps,
)
from .trace import TRACE_SCHEMA_VERSION, Trace, TraceRecord
from .varred import (
    ProbabilitySchedule,
    ProxyFunction,
    Snapshot,
    quadratic_proxy_min,
    snapshot_correction,
    snapshot_update,
)

CONFIG_SCHEMA_VERSION = 1
RNG_NAME = "pcg64"

# Relative slack for the online stepsize-bound checks (epsilon-guard and
# float noise accounted).
_BOUND_SLACK = 1e-9

# Default ball radius for non-interpolated general-convex quadratics;
# verified to contain the exact optimum before the run starts.
_AUTO_BALL_RADIUS = 100.0

ALGORITHMS = (
    "adasps", "adasls", "decsps", "sps", "sps_max", "sls",
    "adagrad_norm", "sgd", "adasps_dl", "adasvrps", "adasvrls", "svrg",
)

_VR_ALGORITHMS = ("adasvrps", "adasvrls", "svrg")


class InvariantViolation(RuntimeError):
    """An online consistency check failed during a run."""


def _require_keys(section: str, payload: dict, allowed: set[str], required: set[str] = frozenset()):
    unknown = set(payload) - allowed
    if unknown:
        raise ConfigurationError(f"unknown {section} key(s): {sorted(unknown)}")
    missing = required - set(payload)
    if missing:
        raise ConfigurationError(f"missing {section} key(s): {sorted(missing)}")


_ALGO_KEYS = {
    "adasps": {"c_p", "c_p_scale"},
    "adasls": {"c_l", "c_l_scale", "rho", "beta", "gamma_max", "max_probes"},
    "decsps": {"c_0", "gamma_b"},
    "sps": {"c"},
    "sps_max": {"c", "gamma_b"},
    "sls": {"rho", "beta", "gamma_max", "max_probes"},
    "adagrad_norm": {"c_g", "b_0"},
    "sgd": {"schedule", "eta0"},
    "adasps_dl": {"c_p_scale", "update_freq"},
    "adasvrps": {"c_p", "c_p_scale", "mu_f", "p_decay_a", "p_fixed", "f_star_mode"},
    "adasvrls": {"c_l", "c_l_scale", "rho", "beta", "gamma_max", "max_probes",
                 "mu_f", "p_decay_a", "p_fixed"},
    "svrg": {"eta"},
}


@dataclass(frozen=True)
class ExperimentConfig:
    """Everything that determines a run, byte for byte."""

    problem: dict
    algorithm: dict
    batch_size: int = 1
    budget_epochs: float = 50.0
    seed: int = 0
    projection: dict = field(default_factory=lambda: {"kind": "auto"})
    trace_cadence: str | int = "epoch"
    x0: dict = field(default_factory=lambda: {"kind": "zeros"})

    def __post_init__(self):
        if self.batch_size < 1:
            raise ConfigurationError("batch_size must be at least 1")
        if not self.budget_epochs > 0:
            raise ConfigurationError("budget_epochs must be positive")
        if isinstance(self.trace_cadence, str):
            if self.trace_cadence != "epoch":
                raise ConfigurationError(
                    f"trace_cadence must be 'epoch' or a positive int, "
                    f"got {self.trace_cadence!r}"
                )
        elif self.trace_cadence < 1:
            raise ConfigurationError("trace_cadence must be positive")
        name = self.algorithm.get("name")
        if name not in ALGORITHMS:
            raise ConfigurationError(f"unknown algorithm {name!r}")
        _require_keys(f"algorithm[{name}]",
                      {k: v for k, v in self.algorithm.items() if k != "name"},
                      _ALGO_KEYS[name])
        _require_keys("projection", self.projection,
                      {"kind", "radius", "center"}, {"kind"})
        _require_keys("x0", self.x0, {"kind", "scale"}, {"kind"})
        kind = self.problem.get("kind")
        if kind == "quadratic":
            _require_keys("problem", self.problem,
                          {"kind", "regime", "interpolated", "n", "d", "seed",
                           "mask_density", "lb_mode"},
                          {"kind", "regime", "interpolated", "n", "d", "seed"})
        elif kind in ("quadratic_file", "logistic_file"):
            _require_keys("problem", self.problem, {"kind", "path"}, {"kind", "path"})
        else:
            raise ConfigurationError(f"unknown problem kind {kind!r}")

    def to_dict(self) -> dict:
        return {
            "schema_version": CONFIG_SCHEMA_VERSION,
            "problem": self.problem,
            "algorithm": self.algorithm,
            "batch_size": self.batch_size,
            "budget_epochs": self.budget_epochs,
            "seed": self.seed,
            "projection": self.projection,
            "trace_cadence": self.trace_cadence,
            "x0": self.x0,
        }

    @classmethod
    def from_dict(cls, payload: dict) -> "ExperimentConfig":
        payload = dict(payload)
        version = payload.pop("schema_version", CONFIG_SCHEMA_VERSION)
        if version != CONFIG_SCHEMA_VERSION:
            raise ConfigurationError(f"unsupported config schema {version!r}")
        _require_keys("config", payload,
                      {"problem", "algorithm", "batch_size", "budget_epochs",
                       "seed", "projection", "trace_cadence", "x0"},
                      {"problem", "algorithm"})
        return cls(**payload)

    @classmethod
    def from_file(cls, path) -> "ExperimentConfig":
        return cls.from_dict(json.loads(Path(path).read_text()))


def build_problem(spec: dict) -> FiniteSumProblem:
    kind = spec["kind"]
    if kind == "quadratic":
        return generate_quadratic(
            regime=spec["regime"], interpolated=spec["interpolated"],
            n=spec["n"], d=spec["d"], seed=spec["seed"],
            mask_density=spec.get("mask_density", 0.1),
        )
    if kind == "quadratic_file":
        return load_problem(spec["path"])
    if kind == "logistic_file":
        return LogisticRegressionProblem(parse_libsvm(Path(spec["path"])))
    raise ConfigurationError(f"unknown problem kind {kind!r}")


def reference_for(problem: FiniteSumProblem, cache_path=None) -> ReferenceOptimum:
    """Exact (quadratic) or cached high-precision (logistic) optimum."""
    if isinstance(problem, DiagonalQuadraticProblem):
        return quadratic_reference_optimum(problem)
    if isinstance(problem, LogisticRegressionProblem):
        content = problem_content_hash(problem)
        if cache_path is not None:
            cache_path = Path(cache_path)
            if cache_path.exists():
                payload = json.loads(cache_path.read_text())
                if payload.get("content_hash") == content:
                    return ReferenceOptimum(
                        payload["f_star"], np.asarray(payload["x_star"]),
                        payload["method"] + "+cache",
                    )
        ref = logistic_reference_optimum(problem)
        if cache_path is not None:
            cache_path.write_text(json.dumps({
                "content_hash": content, "f_star": ref.f_star,
                "x_star": ref.x_star.tolist(), "method": ref.method,
            }, sort_keys=True))
        return ref
    raise ConfigurationError(f"no reference optimum for {type(problem).__name__}")


def resolve_projection(spec: dict, problem: FiniteSumProblem,
                       reference: ReferenceOptimum) -> ProjectionDomain:
    """Materialize the projection domain; "auto" keeps runs unconstrained
    except on non-interpolated general-convex quadratics, which get a
    ball known to contain the optimum."""
    kind = spec["kind"]
    if kind == "unconstrained":
        return ProjectionDomain()
    if kind == "ball":
        domain = ProjectionDomain(kind="euclidean_ball",
                                  center=spec.get("center", 0.0),
                                  radius=spec["radius"])
    elif kind == "auto":
        needs_ball = (
            isinstance(problem, DiagonalQuadraticProblem)
            and not problem.interpolated
            and problem.regime == "general_convex"
        )
        if not needs_ball:
            return ProjectionDomain()
        domain = ProjectionDomain(kind="euclidean_ball", center=0.0,
                                  radius=_AUTO_BALL_RADIUS)
    else:
        raise ConfigurationError(f"unknown projection kind {kind!r}")
    center = np.broadcast_to(np.asarray(domain.center, dtype=float),
                             reference.x_star.shape)
    if np.linalg.norm(reference.x_star - center) > domain.radius:
        raise ConfigurationError(
            "projection ball does not contain the reference optimum"
        )
    return domain


def _initial_point(spec: dict, dim: int, seed: int) -> np.ndarray:
    if spec["kind"] == "zeros":
        return np.zeros(dim)
    if spec["kind"] == "gaussian":
        return make_rng(seed, stream=2).normal(0.0, spec.get("scale", 1.0), size=dim)
    raise ConfigurationError(f"unknown x0 kind {spec['kind']!r}")


@dataclass
class IterationInfo:
    """Per-iteration readings handed to the optional ``on_iteration`` hook."""

    t: int
    eta: float | None
    grad_sq: float
    f_batch: float | None = None
    lower_bound: float | None = None
    gamma: float | None = None
    probes: int = 0
    accumulator: float | None = None
    refreshed: bool = False
    skipped: bool = False


class _Run:
    def __init__(self, config: ExperimentConfig, problem: FiniteSumProblem | None,
                 reference: ReferenceOptimum | None, reference_cache=None):
        self.config = config
        self.problem = problem if problem is not None else build_problem(config.problem)
        if config.batch_size > self.problem.n:
            raise ConfigurationError(
                f"batch_size {config.batch_size} exceeds n={self.problem.n}"
            )
        self.reference = (reference if reference is not None
                          else reference_for(self.problem, reference_cache))
        self.domain = resolve_projection(config.projection, self.problem,
                                         self.reference)
        self.oracle = CountingOracle(self.problem)
        self.sampler = MinibatchSampler(self.problem.n, config.batch_size,
                                        config.seed, stream=0)
        self.refresh_rng = make_rng(config.seed, stream=1)
        self.x = _initial_point(config.x0, self.problem.dim, config.seed)
        self.mean_x = np.zeros_like(self.x)
        self.name = config.algorithm["name"]
        self.opts = {k: v for k, v in config.algorithm.items() if k != "name"}
        L, L_exact = self.problem.smoothness_constant()
        self.L = L
        self.check_bounds = L_exact
        self.first_readings: dict | None = None
        self.snapshot: Snapshot | None = None
        self.schedule: ProbabilitySchedule | None = None
        self.epoch_len = math.ceil(self.problem.n / config.batch_size)
        self.sgd_t = 0
        self._build_stepper()

    # -- construction ------------------------------------------------------

    def _ls_params(self, defaults: LineSearchParams) -> LineSearchParams:
        return LineSearchParams(
            beta=self.opts.get("beta", defaults.beta),
            rho=self.opts.get("rho", defaults.rho),
            gamma_max=self.opts.get("gamma_max", defaults.gamma_max),
            max_probes=self.opts.get("max_probes", defaults.max_probes),
        )

    def _vr_schedule(self) -> ProbabilitySchedule:
        if "p_fixed" in self.opts and "p_decay_a" in self.opts:
            raise ConfigurationError("give either p_fixed or p_decay_a, not both")
        if "p_fixed" in self.opts:
            return ProbabilitySchedule(fixed_p=self.opts["p_fixed"])
        return ProbabilitySchedule(a=self.opts.get("p_decay_a", 0.1))

    def _polyak_scale_args(self, prefix: str) -> dict:
        fixed, scaled = f"{prefix}", f"{prefix}_scale"
        if fixed in self.opts:
            return {fixed: self.opts[fixed]}
        return {scaled: self.opts.get(scaled, 1.0)}

    def _build_stepper(self):
        name, opts = self.name, self.opts
        if name in ("adasps", "adasvrps"):
            self.stepper = AdaSps(**self._polyak_scale_args("c_p"))
        elif name in ("adasls", "adasvrls"):
            params = self._ls_params(LineSearchParams(beta=0.8, rho=0.5))
            self.stepper = AdaSls(params=params, **self._polyak_scale_args("c_l"))
        elif name == "decsps":
            self.stepper = DecSps(c_0=opts.get("c_0", 1.0),
                                  gamma_b=opts.get("gamma_b", 10.0))
        elif name == "sps":
            self.stepper = Sps(c=opts.get("c", 0.5))
        elif name == "sps_max":
            self.stepper = Sps(c=opts.get("c", 0.5),
                               gamma_b=opts.get("gamma_b", 1e-3))
        elif name == "sls":
            self.stepper = Sls(params=self._ls_params(
                LineSearchParams(beta=0.9, rho=0.1)))
        elif name == "adagrad_norm":
            self.stepper = AdaGradNorm(c_g=opts.get("c_g", 1.0),
                                       b_0=opts.get("b_0", 0.0))
        elif name == "sgd":
            self.stepper = SgdSchedule(kind=opts.get("schedule", "constant"),
                                       eta0=opts["eta0"])
        elif name == "adasps_dl":
            self.stepper = AdaSpsDl(
                c_p_scale=opts.get("c_p_scale", 1.0),
                update_freq=opts.get("update_freq", self.epoch_len),
            )
        elif name == "svrg":
            if "eta" not in opts:
                raise ConfigurationError("svrg requires an explicit eta")
            self.stepper = None
        else:  # pragma: no cover - guarded by config validation
            raise ConfigurationError(f"unknown algorithm {name!r}")
        if name in ("adasvrps", "adasvrls"):
            self.mu_f = opts.get("mu_f", 10.0)
            self.f_star_mode = opts.get("f_star_mode", "lower_bound")
            if self.f_star_mode not in ("lower_bound", "exact"):
                raise ConfigurationError(f"unknown f_star_mode {self.f_star_mode!r}")
            if (self.f_star_mode == "exact"
                    and not isinstance(self.problem, DiagonalQuadraticProblem)):
                raise ConfigurationError("exact proxy optima need a quadratic problem")
            self.schedule = self._vr_schedule()

    # -- iteration bodies ----------------------------------------------------

    def _apply(self, eta: float, direction: np.ndarray):
        self.x = project(self.domain, self.x - eta * direction)

    def _record_first(self, **readings):
        if self.first_readings is None:
            self.first_readings = readings

    def _check_adasps_bounds(self, info: IterationInfo, smooth: float):
        if not self.check_bounds or info.skipped:
            return
        st = self.stepper
        denom = math.sqrt(st.accumulator) + st.epsilon
        lower = 1.0 / (2.0 * st.c_p * smooth * denom)
        upper = (info.f_batch - info.lower_bound) / (st.c_p * info.grad_sq * denom)
        if not (lower * (1 - _BOUND_SLACK) <= info.eta <= upper * (1 + _BOUND_SLACK)):
            raise InvariantViolation(
                f"stepsize {info.eta} outside [{lower}, {upper}] at t={info.t}"
            )

    def _check_adasls_bounds(self, info: IterationInfo, smooth: float):
        if not self.check_bounds or info.skipped:
            return
        st = self.stepper
        gamma_floor = min((1 - st.params.rho) / smooth, st.params.gamma_max)
        if info.gamma < gamma_floor * (1 - _BOUND_SLACK):
            raise InvariantViolation(
                f"line-search scale {info.gamma} below floor {gamma_floor}"
            )
        denom = st.c_l * (math.sqrt(st.accumulator) + st.epsilon)
        lower, upper = gamma_floor / denom, info.gamma / denom
        if not (lower * (1 - _BOUND_SLACK) <= info.eta <= upper * (1 + _BOUND_SLACK)):
            raise InvariantViolation(
                f"stepsize {info.eta} outside [{lower}, {upper}] at t={info.t}"
            )

    def _iterate_polyak(self, t: int) -> IterationInfo:
        batch = self.sampler.sample()
        f_b = self.oracle.minibatch_value(batch, self.x)
        grad = self.oracle.minibatch_gradient(batch, self.x)
        gsq = float(grad @ grad)
        if self.name in ("sps", "sps_max"):
            target = self.problem.batch_min(batch)
        else:
            target = self.oracle.batch_lower_bound(batch)
        eta = self.stepper.step(f_b, target, gsq)
        info = IterationInfo(t=t, eta=eta, grad_sq=gsq, f_batch=f_b,
                             lower_bound=target,
                             accumulator=getattr(self.stepper, "accumulator", None),
                             skipped=gsq <= 0.0)
        self._record_first(f_batch=f_b, lower_bound=target, grad_sq=gsq, eta=eta)
        if not info.skipped:
            self._apply(eta, grad)
        if self.name == "adasps":
            self._check_adasps_bounds(info, self.L)
        return info

    def _iterate_linesearch(self, t: int) -> IterationInfo:
        batch = self.sampler.sample()
        f_b = self.oracle.minibatch_value(batch, self.x)
        grad = self.oracle.minibatch_gradient(batch, self.x)
        gsq = float(grad @ grad)
        if gsq <= 0.0:
            self._record_first(f_batch=f_b, grad_sq=gsq, gamma=None, eta=None)
            return IterationInfo(t=t, eta=None, grad_sq=gsq, f_batch=f_b,
                                 skipped=True)
        result = backtracking_armijo(
            lambda z: self.oracle.minibatch_value(batch, z),
            self.x, grad, f_b, gsq, self.stepper.params,
        )
        if self.name == "sls":
            eta = self.stepper.step(result)
        else:
            eta = self.stepper.step(result, gsq)
        info = IterationInfo(t=t, eta=eta, grad_sq=gsq, f_batch=f_b,
                             gamma=result.gamma, probes=result.probes,
                             accumulator=getattr(self.stepper, "accumulator", None))
        self._record_first(f_batch=f_b, grad_sq=gsq, gamma=result.gamma, eta=eta)
        self._apply(eta, grad)
        if self.name == "adasls":
            self._check_adasls_bounds(info, self.L)
        return info

    def _iterate_gradient_only(self, t: int) -> IterationInfo:
        batch = self.sampler.sample()
        grad = self.oracle.minibatch_gradient(batch, self.x)
        gsq = float(grad @ grad)
        if self.name == "adagrad_norm":
            eta = self.stepper.step(gsq)
        else:
            eta = self.stepper.step()
        self._record_first(grad_sq=gsq, eta=eta)
        self._apply(eta, grad)
        return IterationInfo(t=t, eta=eta, grad_sq=gsq)

    def _iterate_proxy(self, t: int) -> IterationInfo:
        if self.snapshot is None:
            self.snapshot = Snapshot.create(self.oracle, self.x)
        batch = self.sampler.sample()
        correction = snapshot_correction(self.problem, self.snapshot, batch)
        anchor = self.x.copy()
        proxy = ProxyFunction(
            base_value=lambda z: self.oracle.minibatch_value(batch, z),
            base_gradient=lambda z: self.oracle.minibatch_gradient(batch, z),
            correction=correction, anchor=anchor, mu_f=self.mu_f,
        )
        f_val = proxy.value(self.x)
        grad = proxy.gradient(self.x)
        gsq = float(grad @ grad)
        if self.f_star_mode == "exact":
            target = quadratic_proxy_min(self.problem, batch, correction,
                                         anchor, self.mu_f)
        else:
            target = proxy.lower_bound(self.oracle.batch_lower_bound(batch))

        gamma = None
        probes = 0
        if self.name == "adasvrps":
            eta = self.stepper.step(f_val, target, gsq)
            skipped = gsq <= 0.0
        else:
            if gsq <= 0.0:
                eta, skipped = None, True
            else:
                result = backtracking_armijo(proxy.value, self.x, grad, f_val,
                                             gsq, self.stepper.params)
                eta = self.stepper.step(result, gsq)
                gamma, probes = result.gamma, result.probes
                skipped = False
        self._record_first(f_batch=f_val, lower_bound=target, grad_sq=gsq,
                           gamma=gamma, eta=eta)
        if not skipped:
            self._apply(eta, grad)
        info = IterationInfo(t=t, eta=eta, grad_sq=gsq, f_batch=f_val,
                             lower_bound=target, gamma=gamma, probes=probes,
                             accumulator=getattr(self.stepper, "accumulator", None),
                             skipped=skipped)
        if self.name == "adasvrps":
            self._check_adasps_bounds(info, self.L + self.mu_f)
        elif not skipped:
            self._check_adasls_bounds(info, self.L + self.mu_f)
        self.snapshot, info.refreshed = snapshot_update(
            self.snapshot, anchor, t, self.schedule, self.refresh_rng, self.oracle
        )
        return info

    def _iterate_svrg(self, t: int) -> IterationInfo:
        refreshed = False
        if t % self.epoch_len == 0:
            self.snapshot = Snapshot.create(self.oracle, self.x)
            refreshed = True
        batch = self.sampler.sample()
        grad = self.oracle.minibatch_gradient(batch, self.x)
        direction = grad + snapshot_correction(self.problem, self.snapshot, batch)
        eta = self.opts["eta"]
        self._record_first(grad_sq=float(grad @ grad), eta=eta)
        self._apply(eta, direction)
        return IterationInfo(t=t, eta=eta, grad_sq=float(direction @ direction),
                             refreshed=refreshed)

    # -- main loop -----------------------------------------------------------

    def execute(self, on_iteration=None) -> Trace:
        cfg = self.config
        n = self.problem.n
        budget = math.ceil(cfg.budget_epochs * n)
        iterate = {
            "adasps": self._iterate_polyak, "decsps": self._iterate_polyak,
            "sps": self._iterate_polyak, "sps_max": self._iterate_polyak,
            "adasps_dl": self._iterate_polyak,
            "adasls": self._iterate_linesearch, "sls": self._iterate_linesearch,
            "adagrad_norm": self._iterate_gradient_only,
            "sgd": self._iterate_gradient_only,
            "adasvrps": self._iterate_proxy, "adasvrls": self._iterate_proxy,
            "svrg": self._iterate_svrg,
        }[self.name]

        records: list[TraceRecord] = []
        abort: str | None = None
        last_epoch_mark = -1

        def emit(t: int, info: IterationInfo | None):
            records.append(self._make_record(t, info))

        emit(0, None)
        t = 0
        try:
            while self.oracle.gradient_cost() < budget:
                self.mean_x += (self.x - self.mean_x) / (t + 1)
                info = iterate(t)
                t += 1
                if on_iteration is not None:
                    on_iteration(info)
                cost = self.oracle.gradient_cost()
                if cfg.trace_cadence == "epoch":
                    mark = cost // n
                    due = mark > last_epoch_mark and cost < budget
                    last_epoch_mark = max(last_epoch_mark, mark)
                else:
                    due = t % cfg.trace_cadence == 0 and cost < budget
                if due:
                    emit(t, info)
            emit(t, info if t > 0 else None)
        except NonFiniteOracleError as exc:
            abort = str(exc)
            trace = Trace(header=self._header(), records=records, abort=abort)
            exc.trace = trace
            raise
        return Trace(header=self._header(), records=records, abort=abort)

    def _make_record(self, t: int, info: IterationInfo | None) -> TraceRecord:
        subopt = self.problem.full_value(self.x) - self.reference.f_star
        if subopt < -1e-9:
            raise InvariantViolation(
                f"suboptimality {subopt} below -1e-9: stale reference optimum?"
            )
        mean = self.mean_x if t > 0 else self.x
        subopt_avg = self.problem.full_value(mean) - self.reference.f_star
        diff = self.x - self.reference.x_star
        counts = self.oracle.counters
        eta = None if info is None or info.skipped else info.eta
        return TraceRecord(
            t=t,
            epoch_equivalent=self.oracle.gradient_cost() / self.problem.n,
            suboptimality=subopt,
            suboptimality_avg=subopt_avg,
            eta=eta,
            grad_norm_sq=info.grad_sq if info is not None else 0.0,
            full_grad_norm=float(np.linalg.norm(self.problem.full_gradient(self.x))),
            stochastic_grad_evals=counts.stochastic_grad_evals,
            full_grad_evals=counts.full_grad_evals,
            function_evals=counts.function_evals,
            probes=info.probes if info is not None else 0,
            refreshed=info.refreshed if info is not None else False,
            dist_sq=float(diff @ diff),
        )

    def _header(self) -> dict:
        resolved = (self.stepper.resolved_constants()
                    if self.stepper is not None else {"eta": self.opts["eta"]})
        header = {
            "schema_version": TRACE_SCHEMA_VERSION,
            "rng": RNG_NAME,
            "config": self.config.to_dict(),
            "algorithm": self.name,
            "n": self.problem.n,
            "dim": self.problem.dim,
            "problem_hash": problem_content_hash(self.problem),
            "f_star": self.reference.f_star,
            "reference_method": self.reference.method,
            "projection": {"kind": self.domain.kind, "radius": self.domain.radius},
            "resolved_constants": resolved,
            "first_readings": self.first_readings,
            "smoothness": {"L": self.L, "exact": self.check_bounds},
        }
        if self.schedule is not None:
            header["refresh_schedule"] = {
                "a": self.schedule.a, "fixed_p": self.schedule.fixed_p,
            }
        return header


def run_experiment(config: ExperimentConfig, out_path=None,
                   problem: FiniteSumProblem | None = None,
                   reference: ReferenceOptimum | None = None,
                   reference_cache=None, on_iteration=None) -> Trace:
    """Execute one fully configured run; optionally write the trace file.

    On a non-finite oracle reading the partial trace (with an abort
    footer) is flushed to ``out_path`` before the error propagates.
    """
    run = _Run(config, problem, reference, reference_cache)
    try:
        trace = run.execute(on_iteration=on_iteration)
    except NonFiniteOracleError as exc:
        if out_path is not None and getattr(exc, "trace", None) is not None:
            exc.trace.write(out_path)
        raise
    if out_path is not None:
        trace.write(out_path)
    return trace
