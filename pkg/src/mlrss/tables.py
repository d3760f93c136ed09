"""Score table: one CSV row per day, shared by the scan detector and EWMA.

Columns: ``date,day,method,log_R,t_star,a,modified``. EWMA rows leave
``log_R``, ``t_star`` and ``modified`` empty.
"""
from __future__ import annotations

import datetime as dt
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import DataError

HEADER = "date,day,method,log_R,t_star,a,modified"


@dataclass(frozen=True)
class ScoreTable:
    dates: list[dt.date]
    method: str
    a: np.ndarray
    log_R: np.ndarray | None = None
    t_star: np.ndarray | None = None
    modified: np.ndarray | None = None


def from_scan(dates, results) -> ScoreTable:
    return ScoreTable(list(dates), "mlrss", np.array([r.a for r in results]),
                      np.array([r.log_R for r in results]), np.array([r.t_star for r in results]),
                      np.array([r.modified for r in results]))


def write_scores(table: ScoreTable, path) -> None:
    rows = [HEADER]
    for i, d in enumerate(table.dates):
        if table.log_R is None:
            rows.append(f"{d.isoformat()},{i + 1},{table.method},,,{float(table.a[i])!r},")
        else:
            rows.append(f"{d.isoformat()},{i + 1},{table.method},{float(table.log_R[i])!r},"
                        f"{int(table.t_star[i])},{float(table.a[i])!r},{int(table.modified[i])}")
    Path(path).write_text("\n".join(rows) + "\n", encoding="utf-8")


def read_scores(path) -> ScoreTable:
    lines = [ln for ln in Path(path).read_text(encoding="utf-8").splitlines() if ln.strip()]
    if not lines or lines[0] != HEADER:
        raise DataError(f"{path}: expected header {HEADER!r}")
    try:
        recs = [ln.split(",") for ln in lines[1:]]
        dates = [dt.date.fromisoformat(r[0]) for r in recs]
        method = recs[0][2]
        a = np.array([float(r[5]) for r in recs])
        if recs[0][3]:
            return ScoreTable(dates, method, a, np.array([float(r[3]) for r in recs]),
                              np.array([int(r[4]) for r in recs]), np.array([int(r[6]) for r in recs]))
    except (ValueError, IndexError) as exc:
        raise DataError(f"{path}: malformed score table") from exc
    return ScoreTable(dates, method, a)
