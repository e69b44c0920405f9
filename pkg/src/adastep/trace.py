"""Deterministic run traces: JSONL header + per-record telemetry.

A trace file is one header line (full config echo, resolved constants,
problem content hash) followed by one JSON object per record and, for
aborted runs, a final footer line.  All numbers serialize via Python's
shortest round-trip float repr, so identical (config, seed) runs
produce byte-identical files.
"""

from __future__ import annotations

import json
import os
import tempfile
from dataclasses import asdict, dataclass
from pathlib import Path

TRACE_SCHEMA_VERSION = 1


@dataclass(frozen=True)
class TraceRecord:
    """Telemetry after ``t`` completed iterations.

    ``eta``/``grad_norm_sq``/``probes``/``refreshed`` describe the last
    completed iteration (``eta`` is null for the initial record and for
    skipped zero-gradient iterations).  ``epoch_equivalent`` is the
    cumulative gradient cost divided by n.
    """

    t: int
    epoch_equivalent: float
    suboptimality: float
    suboptimality_avg: float
    eta: float | None
    grad_norm_sq: float
    full_grad_norm: float
    stochastic_grad_evals: int
    full_grad_evals: int
    function_evals: int
    probes: int = 0
    refreshed: bool = False
    dist_sq: float | None = None


@dataclass
class Trace:
    header: dict
    records: list[TraceRecord]
    abort: str | None = None

    @property
    def final(self) -> TraceRecord:
        return self.records[-1]

    def record_dicts(self) -> list[dict]:
        return [asdict(r) for r in self.records]

    def to_text(self) -> str:
        lines = [json.dumps({"header": self.header}, sort_keys=True)]
        lines.extend(json.dumps(asdict(r), sort_keys=True) for r in self.records)
        if self.abort is not None:
            lines.append(json.dumps({"abort": self.abort}, sort_keys=True))
        return "\n".join(lines) + "\n"

    def write(self, path) -> None:
        """Atomic write: temp file in the target directory, then rename."""
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name, suffix=".tmp")
        try:
            with os.fdopen(fd, "w") as fh:
                fh.write(self.to_text())
            os.replace(tmp, path)
        except BaseException:
            if os.path.exists(tmp):
                os.unlink(tmp)
            raise

    @classmethod
    def read(cls, path) -> "Trace":
        lines = Path(path).read_text().splitlines()
        if not lines:
            raise ValueError(f"empty trace file {path}")
        head = json.loads(lines[0])
        if "header" not in head:
            raise ValueError(f"trace file {path} missing header line")
        header = head["header"]
        if header.get("schema_version") != TRACE_SCHEMA_VERSION:
            raise ValueError(
                f"unsupported trace schema {header.get('schema_version')!r}"
            )
        records: list[TraceRecord] = []
        abort = None
        for line in lines[1:]:
            payload = json.loads(line)
            if "abort" in payload:
                abort = payload["abort"]
            else:
                records.append(TraceRecord(**payload))
        return cls(header=header, records=records, abort=abort)
