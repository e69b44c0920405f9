"""adastep: adaptive Polyak/line-search stepsizes, loopless variance
reduction, and a deterministic benchmark harness for finite-sum convex
minimization."""

from .diagnostics import DiagnosticsReport, compute_diagnostics
from .export import export_plot_data, write_csv
from .linesearch import (
    LineSearchError,
    LineSearchParams,
    LineSearchResult,
    backtracking_armijo,
)
from .problem_core import (
    ConfigurationError,
    CountingOracle,
    FiniteSumProblem,
    MinibatchSampler,
    NonFiniteOracleError,
    OracleCounters,
    ProjectionDomain,
    make_rng,
    project,
)
from .problems import (
    DiagonalQuadraticProblem,
    LibsvmParseError,
    LogisticRegressionProblem,
    ReferenceOptimum,
    SparseDataset,
    err_f_B,
    generate_quadratic,
    load_problem,
    logistic_reference_optimum,
    parse_libsvm,
    quadratic_reference_optimum,
    save_problem,
    serialize_libsvm,
    sigma_f_B,
)
from .runner import (
    ExperimentConfig,
    InvariantViolation,
    run_experiment,
)
from .steppers import (
    AdaGradNorm,
    AdaSls,
    AdaSps,
    AdaSpsDl,
    DecSps,
    InvalidLowerBoundError,
    SgdSchedule,
    Sls,
    Sps,
    sgd_schedule_step,
)
from .trace import Trace, TraceRecord
from .varred import (
    ProbabilitySchedule,
    ProxyFunction,
    Snapshot,
    quadratic_proxy_min,
    snapshot_correction,
    snapshot_update,
)

__version__ = "0.1.0"

__all__ = [
    "AdaGradNorm", "AdaSls", "AdaSps", "AdaSpsDl", "ConfigurationError",
    "CountingOracle", "DecSps", "DiagnosticsReport", "DiagonalQuadraticProblem",
    "ExperimentConfig", "FiniteSumProblem", "InvalidLowerBoundError",
    "InvariantViolation", "LibsvmParseError", "LineSearchError",
    "LineSearchParams", "LineSearchResult", "LogisticRegressionProblem",
    "MinibatchSampler", "NonFiniteOracleError", "OracleCounters",
    "ProbabilitySchedule", "ProjectionDomain", "ProxyFunction",
    "ReferenceOptimum", "SgdSchedule", "Sls", "Snapshot", "SparseDataset",
    "Sps", "Trace", "TraceRecord", "backtracking_armijo",
    "compute_diagnostics", "err_f_B", "export_plot_data", "generate_quadratic",
    "load_problem", "logistic_reference_optimum", "make_rng", "parse_libsvm",
    "project", "quadratic_proxy_min", "quadratic_reference_optimum",
    "run_experiment", "save_problem", "serialize_libsvm", "sgd_schedule_step",
    "sigma_f_B", "snapshot_correction", "snapshot_update", "write_csv",
]
