"""Tidy-CSV export of traces for plotting, with optional mean/std
aggregation across seeds aligned by epoch."""

from __future__ import annotations

import csv
import math
from pathlib import Path

import numpy as np

from .problem_core import ConfigurationError
from .trace import Trace, TraceRecord

LONG_COLUMNS = ("algorithm", "seed", "epoch", "suboptimality",
                "suboptimality_avg", "eta")
AGG_COLUMNS = ("algorithm", "epoch",
               "suboptimality_mean", "suboptimality_std",
               "suboptimality_avg_mean", "suboptimality_avg_std",
               "eta_mean", "eta_std")


def _record_key(trace: Trace, record: TraceRecord):
    """Alignment key: integer epoch for epoch cadence, else iteration."""
    if trace.header["config"]["trace_cadence"] == "epoch":
        return int(math.floor(record.epoch_equivalent + 1e-9))
    return record.t


def export_plot_data(traces: list[Trace], aggregate: str = "none") -> list[dict]:
    """Long-format rows, or per-epoch mean/std across seeds.

    Aggregation requires traces of one algorithm at one cadence; rows
    are joined on the epochs present in every trace, and a mismatch in
    cadence raises an alignment error.
    """
    if aggregate not in ("none", "mean_std"):
        raise ConfigurationError(f"unknown aggregate mode {aggregate!r}")
    if not traces:
        raise ConfigurationError("no traces to export")

    if aggregate == "none":
        rows = []
        for trace in traces:
            seed = trace.header["config"]["seed"]
            algorithm = trace.header["algorithm"]
            for record in trace.records:
                rows.append({
                    "algorithm": algorithm,
                    "seed": seed,
                    "epoch": record.epoch_equivalent,
                    "suboptimality": record.suboptimality,
                    "suboptimality_avg": record.suboptimality_avg,
                    "eta": record.eta,
                })
        return rows

    cadences = {str(t.header["config"]["trace_cadence"]) for t in traces}
    algorithms = {t.header["algorithm"] for t in traces}
    if len(cadences) != 1:
        raise ConfigurationError(f"mismatched trace cadences: {sorted(cadences)}")
    if len(algorithms) != 1:
        raise ConfigurationError(f"cannot aggregate across algorithms: {sorted(algorithms)}")

    keyed = [{_record_key(t, r): r for r in t.records} for t in traces]
    common = sorted(set.intersection(*(set(k) for k in keyed)))
    if not common:
        raise ConfigurationError("traces share no alignment epochs")

    rows = []
    algorithm = algorithms.pop()
    for key in common:
        group = [k[key] for k in keyed]
        subs = np.array([r.suboptimality for r in group])
        avgs = np.array([r.suboptimality_avg for r in group])
        etas = np.array([math.nan if r.eta is None else r.eta for r in group])
        rows.append({
            "algorithm": algorithm,
            "epoch": key,
            "suboptimality_mean": float(subs.mean()),
            "suboptimality_std": float(subs.std()),
            "suboptimality_avg_mean": float(avgs.mean()),
            "suboptimality_avg_std": float(avgs.std()),
            "eta_mean": float(np.nanmean(etas)) if not np.all(np.isnan(etas)) else None,
            "eta_std": float(np.nanstd(etas)) if not np.all(np.isnan(etas)) else None,
        })
    return rows


def write_csv(rows: list[dict], path) -> None:
    """UTF-8 CSV with the documented column order."""
    if not rows:
        raise ConfigurationError("nothing to write")
    columns = AGG_COLUMNS if "suboptimality_mean" in rows[0] else LONG_COLUMNS
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(columns)
        for row in rows:
            writer.writerow(["" if row[c] is None else repr(row[c])
                             if isinstance(row[c], float) else row[c]
                             for c in columns])
