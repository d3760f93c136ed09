"""Daily count series and the comma-separated count-file format.

A count file is UTF-8 text with LF line endings: a ``date,count`` header
followed by one ``YYYY-MM-DD,<int>`` record per consecutive day.
"""
from __future__ import annotations

import datetime as dt
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import DataError


@dataclass(frozen=True)
class CountSeries:
    """Consecutive daily counts anchored to a calendar date.

    Day indices are 1-based: ``counts[0]`` is day ``t = 1`` on ``start``.
    """

    start: dt.date
    counts: np.ndarray

    def __post_init__(self):
        counts = np.asarray(self.counts)
        if counts.ndim != 1:
            raise DataError("counts must be one-dimensional")
        if counts.size and (np.any(counts < 0) or np.any(counts != np.round(counts))):
            raise DataError("counts must be nonnegative integers")
        object.__setattr__(self, "counts", counts.astype(np.int64))

    def __len__(self):
        return self.counts.size

    @property
    def days(self) -> np.ndarray:
        return np.arange(1, len(self) + 1)

    @property
    def dates(self) -> list[dt.date]:
        return [self.start + dt.timedelta(days=i) for i in range(len(self))]

    def date_of(self, t: int) -> dt.date:
        return self.start + dt.timedelta(days=int(t) - 1)

    def slice(self, first: int, last: int) -> "CountSeries":
        """Days ``first..last`` inclusive, re-indexed from 1."""
        return CountSeries(self.date_of(first), self.counts[first - 1:last])


def read_counts(path) -> CountSeries:
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    if not lines or lines[0].strip().lower() != "date,count":
        raise DataError(f"{path}: expected header 'date,count'")
    dates, counts = [], []
    for lineno, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        try:
            d, c = line.split(",")
            dates.append(dt.date.fromisoformat(d.strip()))
            counts.append(int(c))
        except ValueError as exc:
            raise DataError(f"{path}:{lineno}: malformed record {line!r}") from exc
    if not dates:
        raise DataError(f"{path}: no records")
    for prev, cur in zip(dates, dates[1:]):
        if (cur - prev).days != 1:
            raise DataError(f"{path}: days are not consecutive: gap between {prev} and {cur}")
    return CountSeries(dates[0], np.array(counts))


def write_counts(series: CountSeries, path) -> None:
    rows = ["date,count"]
    rows += [f"{d.isoformat()},{int(c)}" for d, c in zip(series.dates, series.counts)]
    Path(path).write_text("\n".join(rows) + "\n", encoding="utf-8", newline="\n")
