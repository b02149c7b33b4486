"""CSV/JSON serialization of bound reports and of generic result rows."""

from __future__ import annotations

import csv
import io
import json
from pathlib import Path
from typing import Iterable, Sequence, TextIO

from .bounds import BoundReport

COLUMNS = (
    "model", "schedule", "p", "s", "delta", "delta_prime", "delta_f",
    "eps_empirical", "leakage_empirical", "retained_empirical",
    "leakage_bound", "retained_bound", "psd_bound",
    "verdict_leakage", "verdict_retained", "verdict_psd", "vacuity_flags",
)
FLOAT_FIELDS = ("s", "delta", "delta_prime", "delta_f", "eps_empirical", "leakage_empirical",
                "retained_empirical", "leakage_bound", "retained_bound", "psd_bound")


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return str(v).lower()
    if isinstance(v, float):
        return format(v, ".17g")
    return str(v)


def report_row(r: BoundReport) -> dict:
    return {c: getattr(r, c) for c in COLUMNS}


def _open(path):
    try:
        return open(path, "w", newline="")
    except OSError as exc:
        raise OSError(f"cannot write report to {path}: {exc.strerror or exc}") from exc


def write_csv(rows: Sequence[dict], columns: Sequence[str], out: TextIO) -> None:
    w = csv.writer(out, lineterminator="\n")
    w.writerow(columns)
    for row in rows:
        w.writerow([_fmt(row.get(c)) for c in columns])


def emit_report(reports: Iterable[BoundReport], fmt: str = "csv", path=None,
                stream: TextIO | None = None) -> str:
    """Write reports to ``path`` (or ``stream``) and return the text."""
    rows = [report_row(r) for r in reports]
    buf = io.StringIO()
    if fmt == "csv":
        write_csv(rows, COLUMNS, buf)
    elif fmt == "json":
        json.dump(rows, buf, indent=1)
        buf.write("\n")
    else:
        raise ValueError(f"unknown format {fmt!r}")
    text = buf.getvalue()
    if path is not None:
        with _open(path) as fh:
            fh.write(text)
    elif stream is not None:
        stream.write(text)
    return text


def emit_rows(rows: Sequence[dict], fmt: str = "csv", path=None,
              stream: TextIO | None = None) -> str:
    """Generic rows; CSV columns are the union of keys in first-seen order."""
    buf = io.StringIO()
    if fmt == "csv":
        columns: list[str] = []
        for row in rows:
            columns.extend(k for k in row if k not in columns)
        write_csv(rows, columns, buf)
    elif fmt == "json":
        json.dump(list(rows), buf, indent=1)
        buf.write("\n")
    else:
        raise ValueError(f"unknown format {fmt!r}")
    text = buf.getvalue()
    if path is not None:
        with _open(path) as fh:
            fh.write(text)
    elif stream is not None:
        stream.write(text)
    return text


def _from_row(row: dict) -> BoundReport:
    kw = {k: row[k] for k in COLUMNS if not k.startswith(("verdict_", "vacuity"))}
    return BoundReport(**kw)


def load_report(path) -> list[BoundReport]:
    """Read a report written by ``emit_report``; verdicts are recomputed."""
    path = Path(path)
    text = path.read_text()
    if path.suffix == ".json" or text.lstrip().startswith("["):
        return [_from_row(r) for r in json.loads(text)]
    out = []
    for row in csv.DictReader(io.StringIO(text)):
        parsed = dict(row)
        parsed["p"] = int(row["p"])
        for k in FLOAT_FIELDS:
            parsed[k] = float(row[k]) if row[k] != "" else None
        out.append(_from_row(parsed))
    return out
