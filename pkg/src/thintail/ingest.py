"""Loss-data ingestion: CSV parsing, aggregation by originating event or
accounting period, and summary statistics.

Input schema (UTF-8 CSV): header ``amount,date,event_id,category`` with
the last two columns optional; dates are ISO-8601; amounts are mEUR and
must be positive.  Unknown columns are rejected unless ``permissive``.
Pre-aggregated inputs are a one-column ``amount`` CSV plus an explicit
observation span in years.

Group sums use ``math.fsum`` so aggregating very many small payments
into one number loses nothing to accumulation error.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from datetime import date
from pathlib import Path
from typing import NamedTuple

__all__ = [
    "BASEL_CATEGORIES",
    "LossRecord",
    "AggregatedLossSet",
    "LossCsvError",
    "parse_csv",
    "parse_pre_aggregated",
    "write_csv",
    "aggregate",
    "summary",
]

BASEL_CATEGORIES = frozenset({"IF", "EF", "EPWS", "CPBP", "DPA", "BDSF", "EDPM"})

_MIN_SPAN_YEARS = 1.0 / 365.0
_DAYS_PER_YEAR = 365.25


class LossCsvError(ValueError):
    """Parse failure(s) with per-line diagnostics."""

    def __init__(self, diagnostics: list[str]):
        self.diagnostics = list(diagnostics)
        super().__init__("\n".join(self.diagnostics))


@dataclass(frozen=True)
class LossRecord:
    """One raw loss payment (amount in mEUR)."""

    amount: float
    date: date
    event_id: str | None = None
    category: str | None = None

    def __post_init__(self):
        if not (math.isfinite(self.amount) and self.amount > 0.0):
            raise ValueError(f"amount must be finite and > 0, got {self.amount!r}")
        if self.category is not None and self.category not in BASEL_CATEGORIES:
            raise ValueError(f"unknown Basel category {self.category!r}")


@dataclass(frozen=True)
class AggregatedLossSet:
    """Aggregated losses (mEUR) with their observation span."""

    losses: tuple[float, ...]
    span_years: float
    label: str = ""
    aggregation_mode: str = "pre-aggregated"

    def __post_init__(self):
        if len(self.losses) == 0:
            raise ValueError("aggregated loss set must not be empty")
        if not (math.isfinite(self.span_years) and self.span_years > 0.0):
            raise ValueError(f"span_years must be > 0, got {self.span_years!r}")


def _open_rows(source):
    if isinstance(source, (str, Path)):
        handle = open(source, "r", encoding="utf-8", newline="")
        return csv.reader(handle), handle
    if isinstance(source, io.TextIOBase):
        return csv.reader(source), None
    raise TypeError(f"expected a path or text stream, got {type(source)!r}")


def parse_csv(source, permissive: bool = False) -> list[LossRecord]:
    """Read loss records; raises :class:`LossCsvError` listing every bad line."""
    reader, handle = _open_rows(source)
    try:
        try:
            header = next(reader)
        except StopIteration:
            raise LossCsvError(["line 1: empty file"]) from None
        header = [h.strip() for h in header]
        expected = ["amount", "date", "event_id", "category"]
        if header[: len(expected)] != expected[: len(header)] or len(header) < 2:
            raise LossCsvError(
                [f"line 1: header must start 'amount,date[,event_id[,category]]', got {','.join(header)!r}"]
            )
        if len(header) > 4 and not permissive:
            extra = ",".join(header[4:])
            raise LossCsvError([f"line 1: unknown columns {extra!r} (pass permissive=True to ignore)"])

        records: list[LossRecord] = []
        problems: list[str] = []
        for lineno, row in enumerate(reader, start=2):
            if not row or all(not cell.strip() for cell in row):
                continue
            row = row + [""] * (4 - len(row)) if len(row) < 4 else row
            try:
                amount = float(row[0])
            except ValueError:
                problems.append(f"line {lineno}: bad amount {row[0]!r}")
                continue
            if not (math.isfinite(amount) and amount > 0.0):
                problems.append(f"line {lineno}: amount must be > 0, got {row[0]!r}")
                continue
            try:
                when = date.fromisoformat(row[1].strip())
            except ValueError:
                problems.append(f"line {lineno}: bad ISO-8601 date {row[1]!r}")
                continue
            event_id = row[2].strip() or None
            category = row[3].strip() or None
            if category is not None and category not in BASEL_CATEGORIES:
                problems.append(f"line {lineno}: unknown Basel category {category!r}")
                continue
            records.append(LossRecord(amount=amount, date=when, event_id=event_id, category=category))

        if problems:
            raise LossCsvError(problems)
        return records
    finally:
        if handle is not None:
            handle.close()


def parse_pre_aggregated(source) -> list[float]:
    """Read a one-column 'amount' CSV of already-aggregated losses."""
    reader, handle = _open_rows(source)
    try:
        try:
            header = next(reader)
        except StopIteration:
            raise LossCsvError(["line 1: empty file"]) from None
        if [h.strip() for h in header] != ["amount"]:
            raise LossCsvError([f"line 1: pre-aggregated header must be 'amount', got {','.join(header)!r}"])
        amounts: list[float] = []
        problems: list[str] = []
        for lineno, row in enumerate(reader, start=2):
            if not row or all(not cell.strip() for cell in row):
                continue
            try:
                value = float(row[0])
            except ValueError:
                problems.append(f"line {lineno}: bad amount {row[0]!r}")
                continue
            if not (math.isfinite(value) and value > 0.0):
                problems.append(f"line {lineno}: amount must be > 0, got {row[0]!r}")
                continue
            amounts.append(value)
        if problems:
            raise LossCsvError(problems)
        return amounts
    finally:
        if handle is not None:
            handle.close()


def write_csv(records: list[LossRecord], destination) -> None:
    """Serialize records in the input schema (inverse of :func:`parse_csv`)."""
    own = isinstance(destination, (str, Path))
    handle = open(destination, "w", encoding="utf-8", newline="") if own else destination
    try:
        writer = csv.writer(handle)
        writer.writerow(["amount", "date", "event_id", "category"])
        for record in records:
            writer.writerow(
                [repr(record.amount), record.date.isoformat(), record.event_id or "", record.category or ""]
            )
    finally:
        if own:
            handle.close()


def _period_key(when: date, granularity: str):
    if granularity == "month":
        return (when.year, when.month)
    if granularity == "quarter":
        return (when.year, (when.month - 1) // 3 + 1)
    if granularity == "year":
        return (when.year,)
    raise ValueError(f"granularity must be month, quarter, or year, got {granularity!r}")


def span_years_of(records: list[LossRecord]) -> float:
    dates = [r.date for r in records]
    days = (max(dates) - min(dates)).days
    return max(days / _DAYS_PER_YEAR, _MIN_SPAN_YEARS)


def aggregate(records: list[LossRecord], mode: str, label: str = "") -> AggregatedLossSet:
    """Aggregate raw records by originating event or by accounting period.

    ``mode`` is ``"event"`` or ``"period:<month|quarter|year>"``.  The
    span defaults to the record date range (floor one day).
    """
    if not records:
        raise ValueError("no records to aggregate")

    if mode == "event":
        missing = [i for i, r in enumerate(records) if r.event_id is None]
        if missing:
            raise ValueError(
                f"event aggregation requires event_id on every record; missing on {len(missing)} record(s)"
            )
        keys = [r.event_id for r in records]
        mode_name = "by-event"
    elif mode.startswith("period:"):
        granularity = mode.split(":", 1)[1]
        keys = [_period_key(r.date, granularity) for r in records]
        mode_name = "by-period"
    else:
        raise ValueError(f"mode must be 'event' or 'period:<granularity>', got {mode!r}")

    groups: dict = {}
    for key, record in zip(keys, records):
        groups.setdefault(key, []).append(record.amount)
    sums = [math.fsum(groups[key]) for key in sorted(groups)]

    return AggregatedLossSet(
        losses=tuple(sums),
        span_years=span_years_of(records),
        label=label,
        aggregation_mode=mode_name,
    )


class LossSummary(NamedTuple):
    count: int
    total: float
    minimum: float
    maximum: float
    mean: float


def summary(loss_set: AggregatedLossSet) -> LossSummary:
    """Count, sum, min, max, mean of the aggregated losses."""
    values = loss_set.losses
    total = math.fsum(values)
    return LossSummary(
        count=len(values),
        total=total,
        minimum=min(values),
        maximum=max(values),
        mean=total / len(values),
    )
