"""Price CSV ingestion, cleaning, min-max normalization and daily returns.

Input CSV contract: UTF-8 text, header exactly ``date,close``, one
ISO-8601 date (``YYYY-MM-DD``) and one decimal close per row, LF or CRLF
line endings. Rows are sorted by date on load; duplicate dates are
rejected rather than averaged so data problems surface early.

Returns are computed on the min-max normalized series, so the observation
at the price minimum maps to 0 and the return that divides by it is
dropped (and counted) instead of producing an infinity.
"""

from __future__ import annotations

import datetime as dt
import math
from dataclasses import dataclass
from pathlib import Path
from typing import IO, Union

import numpy as np

from .errors import (
    BadValueError,
    DegenerateSeriesError,
    DuplicateDateError,
    FormatError,
    InsufficientDataError,
    ParameterError,
    RowError,
)

# Denominators with |v| at or below this are treated as zero when forming
# returns; the affected return is skipped and counted, not emitted as inf.
ZERO_DENOM_EPS = 1e-12

# Below this many observations, returns and point clouds are degenerate.
MIN_OBSERVATIONS = 3

CSV_HEADER = "date,close"

CsvSource = Union[str, Path, IO[bytes], IO[str]]


@dataclass(frozen=True)
class PriceSeries:
    """Dated, ordered raw closing prices for one ticker."""

    ticker: str
    dates: tuple[dt.date, ...]
    closes: np.ndarray

    def __post_init__(self):
        closes = np.asarray(self.closes, dtype=np.float64)
        object.__setattr__(self, "closes", closes)
        if closes.ndim != 1 or len(self.dates) != closes.shape[0]:
            raise ParameterError("dates and closes must be 1-D and equally long")
        for a, b in zip(self.dates, self.dates[1:]):
            if not a < b:
                raise ParameterError(f"dates must be strictly increasing, got {a} then {b}")

    def __len__(self) -> int:
        return self.closes.shape[0]


@dataclass(frozen=True)
class NormalizedSeries:
    """Min-max normalized prices; attains both 0 and 1 by construction."""

    ticker: str
    values: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "values", np.asarray(self.values, dtype=np.float64))

    def __len__(self) -> int:
        return self.values.shape[0]


@dataclass(frozen=True)
class ReturnSeries:
    """Daily returns of a normalized series, with dropped-return bookkeeping.

    ``dropped_count`` is the number of consecutive-pair returns that were
    skipped because the previous value was (numerically) zero.
    """

    ticker: str
    returns: np.ndarray
    dropped_count: int = 0

    def __post_init__(self):
        object.__setattr__(self, "returns", np.asarray(self.returns, dtype=np.float64))

    def __len__(self) -> int:
        return self.returns.shape[0]


def _read_text(source: CsvSource) -> tuple[str, str | None]:
    """Return (text, ticker-from-filename-or-None) for a path or open stream."""
    if isinstance(source, (str, Path)):
        path = Path(source)
        return path.read_bytes().decode("utf-8"), path.stem
    data = source.read()
    if isinstance(data, bytes):
        data = data.decode("utf-8")
    return data, None


def load_price_csv(source: CsvSource, ticker: str | None = None) -> PriceSeries:
    """Parse a ``date,close`` CSV into a PriceSeries sorted by date.

    ``source`` may be a filesystem path or an open text/binary stream.
    When ``ticker`` is omitted it defaults to the file stem (or "series"
    for anonymous streams).

    Raises:
        FormatError: missing or wrong header.
        RowError: a data row that does not parse (carries its line number).
        DuplicateDateError: the same date appears twice.
        BadValueError: a close that is non-finite or <= 0.
    """
    text, stem = _read_text(source)
    if ticker is None:
        ticker = stem or "series"

    lines = text.split("\n")
    if not lines or lines[0].rstrip("\r") != CSV_HEADER:
        got = lines[0].rstrip("\r") if lines else ""
        raise FormatError(f"expected header {CSV_HEADER!r}, got {got!r}")

    rows: list[tuple[dt.date, float]] = []
    seen: set[dt.date] = set()
    for line_no, raw in enumerate(lines[1:], start=2):
        line = raw.rstrip("\r")
        if not line.strip():
            continue
        parts = line.split(",")
        if len(parts) != 2:
            raise RowError(line_no, f"expected 2 fields, got {len(parts)}")
        try:
            day = dt.date.fromisoformat(parts[0].strip())
        except ValueError as exc:
            raise RowError(line_no, f"bad date {parts[0]!r}: {exc}") from exc
        try:
            close = float(parts[1])
        except ValueError as exc:
            raise RowError(line_no, f"bad close {parts[1]!r}") from exc
        if not math.isfinite(close):
            raise BadValueError(f"line {line_no}: close must be finite, got {parts[1]!r}")
        if close <= 0.0:
            raise BadValueError(f"line {line_no}: close must be > 0, got {close}")
        if day in seen:
            raise DuplicateDateError(f"line {line_no}: duplicate date {day.isoformat()}")
        seen.add(day)
        rows.append((day, close))

    rows.sort(key=lambda r: r[0])
    return PriceSeries(
        ticker=ticker,
        dates=tuple(r[0] for r in rows),
        closes=np.array([r[1] for r in rows], dtype=np.float64),
    )


def clean_series(series: PriceSeries) -> tuple[PriceSeries, int]:
    """Drop observations with non-finite closes, preserving order.

    Returns the cleaned series together with the number of removed rows.
    Raises InsufficientDataError if fewer than MIN_OBSERVATIONS survive.
    """
    keep = np.isfinite(series.closes)
    removed = int((~keep).sum())
    if int(keep.sum()) < MIN_OBSERVATIONS:
        raise InsufficientDataError(
            f"{series.ticker}: {int(keep.sum())} finite observations, need >= {MIN_OBSERVATIONS}"
        )
    if removed == 0:
        return series, 0
    dates = tuple(d for d, ok in zip(series.dates, keep) if ok)
    return PriceSeries(series.ticker, dates, series.closes[keep]), removed


def normalize(series: PriceSeries) -> NormalizedSeries:
    """Min-max normalize closes to [0, 1]: (P_t - min P) / (max P - min P)."""
    if len(series) < MIN_OBSERVATIONS:
        raise InsufficientDataError(
            f"{series.ticker}: {len(series)} observations, need >= {MIN_OBSERVATIONS}"
        )
    lo = float(series.closes.min())
    hi = float(series.closes.max())
    if hi == lo:
        raise DegenerateSeriesError(f"{series.ticker}: constant series, min == max == {lo}")
    return NormalizedSeries(series.ticker, (series.closes - lo) / (hi - lo))


def compute_returns(series: NormalizedSeries) -> ReturnSeries:
    """Daily returns R_t = (v_t - v_{t-1}) / v_{t-1} on the normalized values.

    Pairs whose denominator satisfies |v_{t-1}| <= ZERO_DENOM_EPS are
    skipped and counted in ``dropped_count``. Raises InsufficientDataError
    when the input is shorter than 2 or every return is dropped.
    """
    v = series.values
    if v.shape[0] < 2:
        raise InsufficientDataError(f"{series.ticker}: need >= 2 values to form returns")
    prev = v[:-1]
    ok = np.abs(prev) > ZERO_DENOM_EPS
    dropped = int((~ok).sum())
    returns = (v[1:][ok] - prev[ok]) / prev[ok]
    if returns.shape[0] == 0:
        raise InsufficientDataError(f"{series.ticker}: all returns dropped (zero denominators)")
    return ReturnSeries(series.ticker, returns, dropped)
