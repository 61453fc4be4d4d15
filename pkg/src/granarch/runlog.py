"""Append-only evaluation log and the frontier CSV export.

One JSON object per line, written as each evaluation completes, so a crashed
run leaves a readable prefix. Rereading a log reproduces the exact frontier;
timestamps are informational and excluded from determinism guarantees.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass
from typing import Iterable, Optional, TextIO

from .objectives import MetricsRecord
from .search_space import Genome


class LogParseError(Exception):
    pass


@dataclass(frozen=True)
class LogRecord:
    seq: int
    generation: int
    key: str
    genome: Genome
    metrics: MetricsRecord
    fitness: float
    source: str
    timestamp: float


def record_to_json(rec: LogRecord) -> str:
    from .evaluation import genome_to_wire

    m = rec.metrics
    obj = {
        "seq": rec.seq,
        "gen": rec.generation,
        "key": rec.key,
        "genome": genome_to_wire(rec.genome),
        "metrics": {
            "accuracy": m.accuracy,
            "precision": m.precision,
            "recall": m.recall,
            "model_size_bytes": m.model_size_bytes,
            "feasible": m.feasible,
            "error": m.error,
        },
        "fitness": rec.fitness,
        "source": rec.source,
        "ts": rec.timestamp,
    }
    return json.dumps(obj)


def record_from_json(line: str) -> LogRecord:
    from .evaluation import genome_from_wire

    try:
        obj = json.loads(line)
    except json.JSONDecodeError as exc:
        raise LogParseError(f"not valid JSON: {exc}") from None
    try:
        m = obj["metrics"]
        metrics = MetricsRecord(
            accuracy=float(m["accuracy"]),
            precision=float(m["precision"]),
            recall=float(m["recall"]),
            model_size_bytes=int(m["model_size_bytes"]),
            feasible=bool(m["feasible"]),
            error=m.get("error"),
        )
        return LogRecord(
            seq=int(obj["seq"]),
            generation=int(obj["gen"]),
            key=str(obj["key"]),
            genome=genome_from_wire(obj["genome"]),
            metrics=metrics,
            fitness=float(obj["fitness"]),
            source=str(obj["source"]),
            timestamp=float(obj["ts"]),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise LogParseError(f"bad record field: {exc}") from None


class LogWriter:
    """Streams log records to a file, one line per record, flushed immediately."""

    def __init__(self, path: str):
        self.path = path
        self._fh: Optional[TextIO] = open(path, "w", encoding="utf-8")

    def append(self, rec: LogRecord) -> None:
        assert self._fh is not None, "writer is closed"
        self._fh.write(record_to_json(rec) + "\n")
        self._fh.flush()

    def close(self) -> None:
        if self._fh is not None:
            self._fh.close()
            self._fh = None

    def __enter__(self) -> "LogWriter":
        return self

    def __exit__(self, *exc_info) -> None:
        self.close()


def read_log(path: str) -> tuple[list[LogRecord], list[tuple[int, str]]]:
    """Parse a log file; malformed lines are collected as (line number, message)."""
    records: list[LogRecord] = []
    errors: list[tuple[int, str]] = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                records.append(record_from_json(line))
            except LogParseError as exc:
                errors.append((lineno, str(exc)))
    return records, errors


def frontier_csv(records: Iterable[LogRecord], n_layer_columns: int = 5) -> str:
    """Frontier rows as CSV: SR, PT, per-layer F/FS/AF columns, then the four metrics.

    Layer slots beyond a genome's depth stay empty.
    """
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    header = ["SR", "PT"]
    for i in range(1, n_layer_columns + 1):
        header += [f"F{i}", f"FS{i}", f"AF{i}"]
    header += ["Acc", "Pre", "Rec", "MS"]
    writer.writerow(header)
    for rec in records:
        g = rec.genome
        row = [g.data.sample_rate_hz, g.data.preprocessing.value]
        for i in range(n_layer_columns):
            if i < len(g.layers):
                layer = g.layers[i]
                row += [layer.filters, layer.kernel_size, layer.activation.value]
            else:
                row += ["", "", ""]
        m = rec.metrics
        row += [m.accuracy, m.precision, m.recall, m.model_size_bytes]
        writer.writerow(row)
    return out.getvalue()
