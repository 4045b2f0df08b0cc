"""Long-format CSV rows shared by every experiment."""

from __future__ import annotations

import csv
import io
import math
from pathlib import Path
from typing import Iterable

COLUMNS = ("name", "channel_hash", "n", "lambda", "mean", "stderr", "p_value", "pass")


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        if math.isnan(value):
            return ""
        return repr(value)
    return str(value)


def row(name: str, channel_hash: str = "", n=None, lam=None, mean=None, stderr=None,
        p_value=None, passed=None) -> dict:
    return {"name": name, "channel_hash": channel_hash, "n": n, "lambda": lam,
            "mean": mean, "stderr": stderr, "p_value": p_value, "pass": passed}


def csv_text(rows: Iterable[dict]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(COLUMNS)
    for r in rows:
        w.writerow([_fmt(r.get(c)) for c in COLUMNS])
    return buf.getvalue()


def write_csv(rows: Iterable[dict], path: str | Path) -> None:
    Path(path).write_text(csv_text(rows))
