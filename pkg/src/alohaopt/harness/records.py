"""Flat CSV persistence for experiment results.

One record per (experiment, method, sweep value, repetition, evaluation
frame).  Floats are serialized with 17 significant digits so the round trip
is lossless, and records are written in a canonical sort order so output
bytes never depend on scheduling.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

CSV_FIELDS = ("experiment", "method", "sweep_value", "rep", "frame",
              "normalized_throughput", "seed", "wall_ms")


class MalformedRecordError(ValueError):
    """A CSV row that cannot be parsed into a RunRecord."""


@dataclass(frozen=True)
class RunRecord:
    """One evaluation point of one method run."""

    experiment: str
    method: str
    sweep_value: float
    rep: int
    frame: int
    normalized_throughput: float
    seed: int
    wall_ms: float = 0.0


@dataclass(frozen=True)
class SummaryRow:
    """Mean/std over repetitions of the final-frame value of one curve point."""

    method: str
    sweep_value: float
    mean: float
    std: float
    n_reps: int


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def write_records(path, records) -> None:
    """Write records as CSV, sorted by (sweep_value, rep, frame, method)."""
    ordered = sorted(records,
                     key=lambda r: (r.sweep_value, r.rep, r.frame, r.method))
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(CSV_FIELDS)
        for r in ordered:
            writer.writerow((r.experiment, r.method, _fmt(r.sweep_value),
                             r.rep, r.frame, _fmt(r.normalized_throughput),
                             r.seed, _fmt(r.wall_ms)))


def read_records(path) -> list[RunRecord]:
    """Parse a records CSV; malformed rows are reported with line numbers."""
    path = Path(path)
    records: list[RunRecord] = []
    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or tuple(header) != CSV_FIELDS:
            raise MalformedRecordError(
                f"{path}:1: expected header {','.join(CSV_FIELDS)}")
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(CSV_FIELDS):
                raise MalformedRecordError(
                    f"{path}:{lineno}: expected {len(CSV_FIELDS)} fields, "
                    f"got {len(row)}")
            try:
                records.append(RunRecord(
                    experiment=row[0], method=row[1],
                    sweep_value=float(row[2]), rep=int(row[3]),
                    frame=int(row[4]), normalized_throughput=float(row[5]),
                    seed=int(row[6]), wall_ms=float(row[7])))
            except ValueError as exc:
                raise MalformedRecordError(f"{path}:{lineno}: {exc}") from exc
    return records


def summarize(records) -> list[SummaryRow]:
    """Mean and sample standard deviation of final-frame values per curve point.

    Groups by (method, sweep value), keeps each repetition's last evaluation
    frame, and uses the sample convention (ddof=1); a single repetition
    yields std 0.
    """
    records = list(records)
    if not records:
        raise ValueError("no records to summarize")
    last: dict[tuple[str, float, int], RunRecord] = {}
    for r in records:
        key = (r.method, r.sweep_value, r.rep)
        if key not in last or r.frame > last[key].frame:
            last[key] = r
    groups: dict[tuple[str, float], list[float]] = {}
    for (method, sweep, _rep), rec in last.items():
        groups.setdefault((method, sweep), []).append(rec.normalized_throughput)
    rows = []
    for (method, sweep), values in sorted(groups.items()):
        n = len(values)
        mean = sum(values) / n
        if n > 1:
            var = sum((v - mean) ** 2 for v in values) / (n - 1)
            std = var ** 0.5
        else:
            std = 0.0
        rows.append(SummaryRow(method=method, sweep_value=sweep, mean=mean,
                               std=std, n_reps=n))
    return rows
