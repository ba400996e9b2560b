"""Series containers, CSV ingestion, transforms, and analysis-window extraction.

Observations live on a uniform trading-day grid: one step per stored value,
calendar gaps (weekends, holidays, skipped rows) are compacted away. A series
carries a kind tag so downstream operations can refuse the wrong input.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from datetime import date as _date

import numpy as np

from .validation import as_float_vector, as_positive_int, require

KINDS = ("price", "log_price", "return", "parameter")


@dataclass(frozen=True)
class SampledSeries:
    """Uniformly indexed observations with optional calendar dates.

    values      one float per trading-day step
    start_index trading-day index of values[0]
    dates       optional tuple of datetime.date, aligned with values,
                strictly increasing
    kind        one of "price", "log_price", "return", "parameter";
                prices must be strictly positive
    n_skipped   rows dropped during ingestion (blank / sentinel values)
    """

    values: np.ndarray
    start_index: int = 0
    dates: tuple | None = None
    kind: str = "price"
    n_skipped: int = 0

    def __post_init__(self):
        vals = as_float_vector(self.values, "values", min_len=1).copy()
        vals.flags.writeable = False
        object.__setattr__(self, "values", vals)
        require(self.kind in KINDS, f"unknown series kind {self.kind!r}")
        if self.kind == "price":
            require(bool(np.all(vals > 0)), "price values must be strictly positive")
        if self.dates is not None:
            dates = tuple(self.dates)
            require(len(dates) == vals.size,
                    "dates must align one-to-one with values")
            for a, b in zip(dates, dates[1:]):
                require(a < b, "dates must be strictly increasing")
            object.__setattr__(self, "dates", dates)

    def __len__(self):
        return int(self.values.size)


@dataclass(frozen=True)
class AnalysisWindow:
    """A log-price segment around a center time.

    q            window data, length effective_m
    center_index 1-based center time n0 in the parent series
    nominal_m    requested window length M
    effective_m  actual length (< M only at series boundaries)
    """

    q: np.ndarray
    center_index: int
    nominal_m: int
    effective_m: int

    def __post_init__(self):
        q = as_float_vector(self.q, "q", min_len=1).copy()
        q.flags.writeable = False
        object.__setattr__(self, "q", q)
        require(1 <= self.effective_m <= self.nominal_m,
                "effective window length must lie in [1, nominal_m]")
        require(self.effective_m == q.size,
                "effective_m must equal the window data length")

    @classmethod
    def from_values(cls, values, center_index=None):
        """Wrap a raw vector as a full-width window (M = len(values))."""
        q = as_float_vector(values, "values", min_len=2)
        n = q.size
        if center_index is None:
            center_index = max(1, n // 2)
        return cls(q=q, center_index=int(center_index), nominal_m=n, effective_m=n)


def ingest_csv(text, date_column=None, value_column="price", kind="price"):
    """Parse CSV text (header row, configurable columns) into a SampledSeries.

    The date column holds ISO-8601 dates or plain integer trading-day
    indices; date_column=None picks "date" if present, else "index" (the
    two names serialize_csv writes). Rows whose value field is blank or
    "NA" are skipped and counted. Non-positive prices and out-of-order
    dates are rejected with the offending physical row number (header =
    row 1).
    """
    reader = csv.reader(io.StringIO(text))
    try:
        header = next(reader)
    except StopIteration:
        raise ValueError("empty input: no header row") from None
    header = [h.strip() for h in header]
    if date_column is None:
        date_column = "date" if "date" in header else "index"
    for col in (date_column, value_column):
        if col not in header:
            raise ValueError(f"column {col!r} not found in header {header}")
    date_pos = header.index(date_column)
    value_pos = header.index(value_column)

    values = []
    dates = []
    indices = []
    skipped = 0
    for offset, row in enumerate(reader):
        row_num = offset + 2
        if not row or all(not cell.strip() for cell in row):
            continue
        if max(date_pos, value_pos) >= len(row):
            raise ValueError(f"short row at row {row_num}")
        raw_value = row[value_pos].strip()
        raw_date = row[date_pos].strip()
        if raw_value in ("", "NA") or raw_date in ("", "NA"):
            skipped += 1
            continue
        try:
            value = float(raw_value)
        except ValueError:
            raise ValueError(
                f"unparseable {value_column} {raw_value!r} at row {row_num}") from None
        if kind == "price" and value <= 0:
            raise ValueError(f"non-positive {value_column} at row {row_num}")
        try:
            parsed_date = _date.fromisoformat(raw_date)
            parsed_index = None
        except ValueError:
            try:
                parsed_index = int(raw_date)
                parsed_date = None
            except ValueError:
                raise ValueError(
                    f"unparseable {date_column} {raw_date!r} at row {row_num}") from None
        if parsed_date is not None:
            if indices:
                raise ValueError(f"mixed date and index entries at row {row_num}")
            if dates and dates[-1] >= parsed_date:
                raise ValueError(f"dates not strictly increasing at row {row_num}")
            dates.append(parsed_date)
        else:
            if dates:
                raise ValueError(f"mixed date and index entries at row {row_num}")
            if indices and indices[-1] >= parsed_index:
                raise ValueError(f"indices not strictly increasing at row {row_num}")
            indices.append(parsed_index)
        values.append(value)

    if not values:
        raise ValueError("no usable rows in input")
    return SampledSeries(
        values=np.array(values, dtype=float),
        start_index=indices[0] if indices else 0,
        dates=tuple(dates) if dates else None,
        kind=kind,
        n_skipped=skipped,
    )


def serialize_csv(series, date_column=None, value_column=None):
    """Render a series back to CSV text; inverse of ingest_csv.

    Values are written with repr() so a round trip is bit-exact. When the
    series has no dates the first column holds the integer trading-day
    index instead.
    """
    if value_column is None:
        value_column = {"price": "price", "return": "return"}.get(series.kind, "value")
    if date_column is None:
        date_column = "date" if series.dates is not None else "index"
    lines = [f"{date_column},{value_column}"]
    for i, v in enumerate(series.values):
        stamp = (series.dates[i].isoformat() if series.dates is not None
                 else str(series.start_index + i))
        lines.append(f"{stamp},{float(v)!r}")
    return "\n".join(lines) + "\n"


def log_transform(series):
    """Natural log of a price series; indices and dates carry over."""
    require(series.kind == "price",
            f"log_transform expects a price series, got kind {series.kind!r}")
    require(len(series) >= 2, "series too short for analysis (need length >= 2)")
    return SampledSeries(
        values=np.log(series.values),
        start_index=series.start_index,
        dates=series.dates,
        kind="log_price",
    )


def returns(series):
    """Simple one-step returns R_n = (P(n+1) - P(n)) / P(n)."""
    require(series.kind == "price",
            f"returns expects a price series, got kind {series.kind!r}")
    require(len(series) >= 2, "series too short for analysis (need length >= 2)")
    p = series.values
    r = np.diff(p) / p[:-1]
    return SampledSeries(
        values=r,
        start_index=series.start_index,
        dates=series.dates[:-1] if series.dates is not None else None,
        kind="return",
    )


def window_bounds(n0, n_total, m):
    """0-based (start, length) of the analysis window centered at n0 (1-based).

    Interior centers get the full length M; near an edge the window keeps
    its far boundary pinned and shrinks toward the series end, still
    containing n0.
    """
    half = m // 2
    if n0 < half:
        m_eff = n0 - half + m
        return 0, m_eff
    if n0 > n_total - m + half:
        m_eff = min((n_total - n0) - half + m, n_total)
        return n_total - m_eff, m_eff
    return n0 - half, m


def window_slice(series, n0, m):
    """Extract the analysis window of nominal length m centered at n0.

    n0 is 1-based. Requires a log-price series at least m long; m >= 4.
    """
    require(series.kind == "log_price",
            f"window_slice expects a log_price series, got kind {series.kind!r}")
    m = as_positive_int(m, "M", minimum=4)
    n_total = len(series)
    require(n_total >= m, f"window length M={m} exceeds series length {n_total}")
    n0 = as_positive_int(n0, "n0", minimum=1)
    require(n0 <= n_total, f"center index n0={n0} out of range 1..{n_total}")
    start, m_eff = window_bounds(n0, n_total, m)
    return AnalysisWindow(
        q=series.values[start:start + m_eff],
        center_index=n0,
        nominal_m=m,
        effective_m=m_eff,
    )
