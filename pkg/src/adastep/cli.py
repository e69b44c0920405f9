"""Command-line interface: generate problems, run experiments, sweep
hyperparameter grids, diagnose traces, verify identities, export CSVs."""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from dataclasses import asdict
from pathlib import Path

from .diagnostics import compute_diagnostics
from .export import export_plot_data, write_csv
from .problem_core import ConfigurationError, NonFiniteOracleError
from .problems import generate_quadratic, save_problem
from .runner import ExperimentConfig, build_problem, run_experiment
from .trace import Trace
from .verification import run_verification

OUT_DIR_ENV = "ADASTEP_OUT_DIR"


def _out_path(path: str) -> Path:
    """Resolve an output path against the optional output-dir override."""
    base = os.environ.get(OUT_DIR_ENV)
    p = Path(path)
    if base and not p.is_absolute():
        return Path(base) / p
    return p


def _parse_grid(spec: str) -> tuple[str, list[float]]:
    """"name=lo..hi" (decade steps) or "name=v1,v2,...".

    The range form enumerates powers of ten between the endpoints, so
    eta=1e-4..1e3 yields the 8 values 1e-4, 1e-3, ..., 1e3.
    """
    name, sep, body = spec.partition("=")
    if not sep or not name or not body:
        raise ConfigurationError(f"bad grid spec {spec!r}, expected name=...")
    if ".." in body:
        lo_s, _, hi_s = body.partition("..")
        lo, hi = float(lo_s), float(hi_s)
        if lo <= 0 or hi <= 0 or hi < lo:
            raise ConfigurationError(f"bad grid range {body!r}")
        lo_e, hi_e = math.log10(lo), math.log10(hi)
        if abs(lo_e - round(lo_e)) > 1e-9 or abs(hi_e - round(hi_e)) > 1e-9:
            raise ConfigurationError("grid range endpoints must be powers of ten")
        values = [10.0 ** e for e in range(round(lo_e), round(hi_e) + 1)]
    else:
        values = [float(tok) for tok in body.split(",") if tok]
        if not values:
            raise ConfigurationError(f"empty grid list in {spec!r}")
    return name, values


def _cmd_generate(args) -> int:
    problem = generate_quadratic(
        regime=args.regime, interpolated=args.interpolated,
        n=args.n, d=args.d, seed=args.seed, mask_density=args.mask_density,
    )
    out = _out_path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    save_problem(problem, out)
    print(f"wrote {args.regime} instance (n={args.n}, d={args.d}, "
          f"interpolated={args.interpolated}) to {out}")
    return 0


def _load_config(args) -> ExperimentConfig:
    config = ExperimentConfig.from_file(args.config)
    if getattr(args, "seed", None) is not None:
        payload = config.to_dict()
        payload["seed"] = args.seed
        config = ExperimentConfig.from_dict(payload)
    return config


def _cmd_run(args) -> int:
    config = _load_config(args)
    out = _out_path(args.out)
    trace = run_experiment(config, out_path=out)
    final = trace.final
    print(f"wrote trace to {out}: {final.t} iterations, "
          f"{final.epoch_equivalent:.2f} epoch-equivalents, "
          f"final suboptimality {final.suboptimality:.6e}")
    return 0


def _cmd_sweep(args) -> int:
    config = _load_config(args)
    name, values = _parse_grid(args.grid)
    problem = build_problem(config.problem)
    rows = []
    for value in values:
        payload = config.to_dict()
        payload["algorithm"] = dict(payload["algorithm"], **{name: value})
        cell = ExperimentConfig.from_dict(payload)
        try:
            trace = run_experiment(cell, problem=problem)
            finals = [r.suboptimality for r in trace.records]
            final, best = finals[-1], min(finals)
        except NonFiniteOracleError:
            final = best = math.inf  # diverged cell stays in the table
        rows.append({"algorithm": cell.algorithm["name"], name: value,
                     "final_suboptimality": final,
                     "best_suboptimality": best})
    rows.sort(key=lambda r: r["final_suboptimality"])
    width = max(len(f"{r[name]:g}") for r in rows)
    print(f"{name:>{width}}  final_suboptimality  best_suboptimality")
    for row in rows:
        print(f"{row[name]:>{width}g}  {row['final_suboptimality']:>19.6e}  "
              f"{row['best_suboptimality']:>18.6e}")
    print(f"best {name} by final suboptimality: {rows[0][name]:g}")
    if args.out:
        out = _out_path(args.out)
        out.parent.mkdir(parents=True, exist_ok=True)
        out.write_text(json.dumps(rows, sort_keys=True, indent=2))
        print(f"wrote summary to {out}")
    return 0


def _cmd_diagnose(args) -> int:
    trace = Trace.read(args.trace)
    config = ExperimentConfig.from_dict(trace.header["config"])
    problem = build_problem(config.problem)
    report = compute_diagnostics(problem, config.batch_size, trace)
    payload = asdict(report)
    text = json.dumps(payload, sort_keys=True, indent=2)
    if args.out:
        out = _out_path(args.out)
        out.parent.mkdir(parents=True, exist_ok=True)
        out.write_text(text)
    print(text)
    return 0


def _cmd_verify(args) -> int:
    results = run_verification(trials=args.trials, seed=args.seed)
    failed = 0
    for result in results:
        status = "PASS" if result.passed else "FAIL"
        failed += not result.passed
        print(f"{status}  {result.name}: {result.detail}")
    return 1 if failed else 0


def _cmd_export_plot(args) -> int:
    traces = [Trace.read(path) for path in args.traces]
    rows = export_plot_data(traces, aggregate=args.aggregate)
    out = _out_path(args.out)
    write_csv(rows, out)
    print(f"wrote {len(rows)} rows to {out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="adastep",
        description="Adaptive-stepsize benchmark harness",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="generate a synthetic quadratic instance")
    p.add_argument("--regime", required=True,
                   choices=["strongly_convex", "general_convex"])
    p.add_argument("--interpolated", action="store_true")
    p.add_argument("--n", type=int, default=50)
    p.add_argument("--d", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--mask-density", type=float, default=0.1)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_generate)

    p = sub.add_parser("run", help="execute one configured experiment")
    p.add_argument("--config", required=True)
    p.add_argument("--seed", type=int, default=None, help="override config seed")
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_run)

    p = sub.add_parser("sweep", help="grid-sweep one algorithm hyperparameter")
    p.add_argument("--config", required=True)
    p.add_argument("--grid", required=True,
                   help="name=lo..hi (decades) or name=v1,v2,...")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--out", default=None)
    p.set_defaults(func=_cmd_sweep)

    p = sub.add_parser("diagnose", help="diagnostics report for a trace")
    p.add_argument("--trace", required=True)
    p.add_argument("--out", default=None)
    p.set_defaults(func=_cmd_diagnose)

    p = sub.add_parser("verify", help="run the identity/property check suites")
    p.add_argument("--trials", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=_cmd_verify)

    p = sub.add_parser("export-plot", help="traces to tidy CSV")
    p.add_argument("--traces", nargs="+", required=True)
    p.add_argument("--aggregate", choices=["none", "mean_std"], default="none")
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_export_plot)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ConfigurationError, FileNotFoundError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except NonFiniteOracleError as exc:
        print(f"aborted: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
