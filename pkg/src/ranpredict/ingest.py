"""Telemetry CSV ingestion: parsing, timestamp alignment, outlier cleanup.

The canonical log format is a UTF-8, comma-separated file with a header row
naming at least ``timestamp_ms, ue_id, tti, mcs, snr_db, bler, brate_kbps``
(any order, case-insensitive, extra columns ignored). An optional ``scenario``
column tags the capture campaign. A ``bler_pct`` column may stand in for
``bler``; its values are divided by 100 at parse time. When both are present,
``bler`` wins.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, CsvSchemaError

REQUIRED_COLUMNS = ("timestamp_ms", "ue_id", "tti", "mcs", "snr_db", "bler", "brate_kbps")

CANONICAL_HEADER = REQUIRED_COLUMNS + ("scenario",)


@dataclass(frozen=True)
class MetricRecord:
    """One per-TTI telemetry sample as logged by the radio stack."""

    timestamp_ms: int
    ue_id: int
    tti: int
    mcs: int
    snr_db: float
    bler: float
    brate_kbps: float
    scenario: str | None = None

    def __post_init__(self) -> None:
        if not 0 <= self.mcs <= 28:
            raise ValueError(f"mcs out of range [0, 28]: {self.mcs}")
        if not 0.0 <= self.bler <= 1.0:
            raise ValueError(f"bler out of range [0, 1]: {self.bler}")
        if self.brate_kbps < 0:
            raise ValueError(f"brate_kbps must be >= 0: {self.brate_kbps}")
        if self.tti < 0:
            raise ValueError(f"tti must be >= 0: {self.tti}")


@dataclass(frozen=True)
class CleaningPolicy:
    """Thresholds for the outlier-filtering pass."""

    snr_min_db: float = -10.0
    snr_max_db: float = 40.0
    zscore_cutoff: float = 6.0
    drop_zero_brate: bool = True

    def __post_init__(self) -> None:
        if not self.snr_min_db < self.snr_max_db:
            raise ConfigError(
                f"snr_min_db ({self.snr_min_db}) must be < snr_max_db ({self.snr_max_db})"
            )
        if self.zscore_cutoff <= 0:
            raise ConfigError(f"zscore_cutoff must be > 0: {self.zscore_cutoff}")


@dataclass(frozen=True)
class RowError:
    """A rejected data row: where it was and why it failed."""

    line: int
    column: str
    message: str


@dataclass
class ParseResult:
    """Parsed records plus the rows that had to be skipped."""

    records: list[MetricRecord]
    errors: list[RowError]

    @property
    def n_parsed(self) -> int:
        return len(self.records)

    @property
    def n_rejected(self) -> int:
        return len(self.errors)


_INT_FIELDS = ("timestamp_ms", "ue_id", "tti", "mcs")
_FLOAT_FIELDS = ("snr_db", "brate_kbps")


def parse_metrics_csv(stream) -> ParseResult:
    """Parse a telemetry CSV stream into validated records.

    Accepts a text or binary stream. Unparseable or out-of-range cells reject
    only their row; the rejection is recorded with line number and column
    name. A missing required column raises :class:`CsvSchemaError`. An empty
    stream yields an empty result.
    """
    if isinstance(stream, (bytes, bytearray)):
        stream = io.BytesIO(stream)
    if hasattr(stream, "read") and isinstance(stream.read(0), bytes):
        stream = io.TextIOWrapper(stream, encoding="utf-8-sig", newline="")

    reader = csv.reader(stream)
    header = next(reader, None)
    if header is None:
        return ParseResult(records=[], errors=[])

    names = [h.strip().lstrip("﻿").lower() for h in header]
    index: dict[str, int] = {}
    for i, name in enumerate(names):
        index.setdefault(name, i)

    bler_from_pct = "bler" not in index and "bler_pct" in index
    missing = [
        c for c in REQUIRED_COLUMNS if c not in index and not (c == "bler" and bler_from_pct)
    ]
    if missing:
        raise CsvSchemaError(f"missing required column(s): {', '.join(missing)}")

    scenario_col = index.get("scenario")
    bler_col = index["bler_pct"] if bler_from_pct else index["bler"]

    records: list[MetricRecord] = []
    errors: list[RowError] = []
    for row in reader:
        if not row or all(not cell.strip() for cell in row):
            continue
        line = reader.line_num
        fields: dict[str, object] = {}
        bad: RowError | None = None
        try:
            for name in _INT_FIELDS:
                cell = row[index[name]].strip()
                try:
                    fields[name] = int(cell)
                except ValueError:
                    bad = RowError(line, name, f"not an integer: {cell!r}")
                    break
            else:
                for name in _FLOAT_FIELDS:
                    cell = row[index[name]].strip()
                    try:
                        fields[name] = float(cell)
                    except ValueError:
                        bad = RowError(line, name, f"not a number: {cell!r}")
                        break
        except IndexError:
            bad = RowError(line, "<row>", f"expected {len(names)} cells, got {len(row)}")
        if bad is None and "bler" not in fields:
            cell = row[bler_col].strip() if bler_col < len(row) else ""
            try:
                value = float(cell)
            except ValueError:
                bad = RowError(line, "bler_pct" if bler_from_pct else "bler", f"not a number: {cell!r}")
            else:
                fields["bler"] = value / 100.0 if bler_from_pct else value

        if bad is None:
            scenario = None
            if scenario_col is not None and scenario_col < len(row):
                scenario = row[scenario_col].strip() or None
            try:
                records.append(MetricRecord(scenario=scenario, **fields))  # type: ignore[arg-type]
            except ValueError as exc:
                column = str(exc).split(" ", 1)[0]
                bad = RowError(line, column, str(exc))
        if bad is not None:
            errors.append(bad)
    return ParseResult(records=records, errors=errors)


def write_metrics_csv(records: list[MetricRecord], dest) -> None:
    """Write records in the canonical column order (see CANONICAL_HEADER).

    ``dest`` may be a path or a text stream. Floats are written with ``repr``
    so a parse/write/parse round trip is field-identical and byte-stable.
    """
    if hasattr(dest, "write"):
        _write_rows(records, dest)
    else:
        with open(dest, "w", encoding="utf-8", newline="") as fh:
            _write_rows(records, fh)


def _write_rows(records: list[MetricRecord], fh) -> None:
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(CANONICAL_HEADER)
    for r in records:
        writer.writerow(
            [
                r.timestamp_ms,
                r.ue_id,
                r.tti,
                r.mcs,
                repr(float(r.snr_db)),
                repr(float(r.bler)),
                repr(float(r.brate_kbps)),
                r.scenario or "",
            ]
        )


def align_timestamps(records: list[MetricRecord]) -> tuple[list[MetricRecord], int]:
    """Stably sort by (ue_id, timestamp_ms) and drop duplicate timestamps.

    Among rows sharing (ue_id, timestamp_ms) only the last in input order is
    kept: later log lines reflect the most recent scheduler state. Returns
    the aligned records and the number of duplicates dropped.
    """
    ordered = sorted(records, key=lambda r: (r.ue_id, r.timestamp_ms))
    out: list[MetricRecord] = []
    duplicates = 0
    for r in ordered:
        if out and out[-1].ue_id == r.ue_id and out[-1].timestamp_ms == r.timestamp_ms:
            out[-1] = r
            duplicates += 1
        else:
            out.append(r)
    return out, duplicates


def filter_outliers(
    records: list[MetricRecord], policy: CleaningPolicy = CleaningPolicy()
) -> tuple[list[MetricRecord], int]:
    """Drop physically implausible rows, then z-score outliers.

    Range rules first: snr_db outside [snr_min_db, snr_max_db], and
    brate_kbps <= 0 when drop_zero_brate. The z-score pass then computes the
    mean and population std of snr_db, brate_kbps, and bler over the rows that
    survived the range rules (one pass) and drops any row deviating from a
    field mean by more than zscore_cutoff stds. Fields with zero std are
    skipped. Returns (kept, dropped_count).
    """
    kept = [
        r
        for r in records
        if policy.snr_min_db <= r.snr_db <= policy.snr_max_db
        and (not policy.drop_zero_brate or r.brate_kbps > 0)
    ]
    if kept:
        values = np.array([(r.snr_db, r.brate_kbps, r.bler) for r in kept], dtype=float)
        means = values.mean(axis=0)
        stds = values.std(axis=0)
        mask = np.ones(len(kept), dtype=bool)
        for col in range(values.shape[1]):
            if stds[col] > 0:
                mask &= np.abs(values[:, col] - means[col]) <= policy.zscore_cutoff * stds[col]
        kept = [r for r, ok in zip(kept, mask) if ok]
    return kept, len(records) - len(kept)
