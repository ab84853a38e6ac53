"""Delimited report emission: one inequality per CSV row, nested JSON twin.

All writes are atomic (temp file in the target directory, then rename)
and byte-deterministic: floats are serialized with repr, JSON keys are
sorted, and no timestamps or absolute paths enter the output.
"""

from __future__ import annotations

import csv
import io
import json
import os
import tempfile
from pathlib import Path

import numpy as np

from .experiments import ExperimentReport, InequalityRow, SweepRow

SWEEP_COLUMNS = [
    "F", "eps", "bound", "d_joint", "d_post", "yes_lb", "no_ub",
    "cond_exact", "cond_approx", "pass_propagation", "pass_verdict",
    "pass_floor", "vacuous", "grid", "mode", "direction",
]


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return "1" if value else "0"
    if isinstance(value, float):
        # plain-float repr also normalizes numpy scalar reprs
        return repr(float(value))
    return str(value)


def atomic_write_text(path: Path, text: str) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def rows_csv(rows: list[InequalityRow]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["name", "lhs", "rhs", "margin", "pass", "note"])
    for r in rows:
        writer.writerow([r.name, _fmt(r.lhs), _fmt(r.rhs), _fmt(r.margin),
                         _fmt(r.passed), r.note])
    return buf.getvalue()


def sweep_csv(sweep: list[SweepRow]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(SWEEP_COLUMNS)
    for row in sweep:
        writer.writerow([
            _fmt(row.f_per_copy), _fmt(row.eps), _fmt(row.bound),
            _fmt(row.d_joint), _fmt(row.d_post), _fmt(row.yes_lb),
            _fmt(row.no_ub), _fmt(row.cond_exact), _fmt(row.cond_approx),
            _fmt(row.pass_propagation), _fmt(row.pass_verdict),
            _fmt(row.pass_floor), _fmt(row.vacuous),
            row.grid, row.mode, row.direction,
        ])
    return buf.getvalue()


def _json_default(obj):
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    raise TypeError(f"not JSON serializable: {type(obj).__name__}")


def report_json(report: ExperimentReport) -> str:
    return json.dumps(report.to_json_dict(), sort_keys=True, indent=2,
                      default=_json_default) + "\n"


def write_report(report: ExperimentReport, out_dir: Path, stem: str,
                 fmt: str = "both") -> list[Path]:
    """Write the delimited views of a report; returns the paths written."""
    out_dir = Path(out_dir)
    written: list[Path] = []
    if fmt in ("csv", "both"):
        path = out_dir / f"{stem}.csv"
        atomic_write_text(path, rows_csv(report.rows))
        written.append(path)
        if report.sweep:
            spath = out_dir / f"{stem}_sweep.csv"
            atomic_write_text(spath, sweep_csv(report.sweep))
            written.append(spath)
    if fmt in ("json", "both"):
        path = out_dir / f"{stem}.json"
        atomic_write_text(path, report_json(report))
        written.append(path)
    return written
