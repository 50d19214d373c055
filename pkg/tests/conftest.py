"""Shared fixtures: a frozen synthetic price path and CSV writers.

The synthetic series is a 251-row geometric random walk from a fixed
numpy seed, with its minimum placed at the last row so that min-max
normalization never zeroes a return denominator: 251 prices give exactly
250 returns and 241 embedded points at the default window and stride.
"""

from __future__ import annotations

import datetime as dt
from pathlib import Path

import numpy as np
import pytest


def synthetic_prices() -> np.ndarray:
    rs = np.random.RandomState(20240102)
    steps = rs.normal(0.0004, 0.012, 249)
    prices = 100.0 * np.cumprod(np.concatenate([[1.0], 1.0 + steps]))
    return np.concatenate([prices, [0.98 * prices.min()]])


def weekdays(start: dt.date, count: int) -> list[dt.date]:
    days = []
    day = start
    while len(days) < count:
        if day.weekday() < 5:
            days.append(day)
        day += dt.timedelta(days=1)
    return days


def write_price_csv(path: Path, closes, start: dt.date = dt.date(2024, 1, 2)) -> Path:
    closes = np.asarray(closes, dtype=np.float64)
    dates = weekdays(start, closes.shape[0])
    lines = ["date,close"]
    lines.extend(f"{d.isoformat()},{float(c)!r}" for d, c in zip(dates, closes))
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


@pytest.fixture(scope="session")
def synthetic_csv(tmp_path_factory) -> Path:
    path = tmp_path_factory.mktemp("data") / "SYN.csv"
    return write_price_csv(path, synthetic_prices())
