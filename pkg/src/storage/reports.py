"""
Plot-ready outputs of a run.

The time series CSV starts with a version comment, then a frozen header:

    # gmcf-timeseries v1
    t,dt,sup_H2,sup_A2,...,degenerate_pts

Floats are written with repr() so they round-trip exactly; quantities
that do not apply to a run are empty fields.
"""

import csv
from pathlib import Path
from typing import Dict, List, Optional, Union

from src.models.errors import GMCFError
from src.models.schema import TIMESERIES_COLUMNS, MonitorReport, SweepReport

TIMESERIES_VERSION = "# gmcf-timeseries v1"


def _format(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _atomic_write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_text(text, encoding="utf-8", newline="")
    tmp.replace(path)


def write_timeseries(report: MonitorReport, path: Union[str, Path]) -> Path:
    """
    Write the monitor rows as CSV.

    Raises:
        GMCFError: if the report has no rows
    """
    if not report.rows:
        raise GMCFError("cannot write an empty time series")
    lines = [TIMESERIES_VERSION, ",".join(TIMESERIES_COLUMNS)]
    for row in sorted(report.rows, key=lambda r: r.t):
        values = row.model_dump()
        lines.append(",".join(_format(values[column]) for column in TIMESERIES_COLUMNS))

    path = Path(path)
    _atomic_write(path, "\n".join(lines) + "\n")
    return path


def read_timeseries(path: Union[str, Path]) -> List[Dict[str, Optional[float]]]:
    """Parse a file written by write_timeseries; empty fields come back as None."""
    with open(path, newline="", encoding="utf-8") as handle:
        version = handle.readline().rstrip("\n")
        if version != TIMESERIES_VERSION:
            raise GMCFError(f"unexpected time series version line {version!r}")
        rows = []
        for record in csv.DictReader(handle):
            rows.append({key: (float(value) if value != "" else None) for key, value in record.items()})
    return rows


def write_report(report: MonitorReport, path: Union[str, Path]) -> Path:
    """Write the full report (verdicts, rows, metadata) as JSON."""
    path = Path(path)
    _atomic_write(path, report.model_dump_json(indent=2) + "\n")
    return path


def write_sweep(report: SweepReport, path: Union[str, Path]) -> Path:
    """
    Write a convergence table: one line per (quantity, resolution or dt).

    Columns: quantity, sweep (N or dt), parameter, value, order.
    """
    lines = ["quantity,sweep,parameter,value,order"]
    for sweep, entries in (("N", report.entries), ("dt", report.dt_entries)):
        for entry in entries:
            orders = [None] + list(entry.orders)
            for parameter, value, order in zip(entry.parameters, entry.values, orders):
                lines.append(",".join([
                    entry.quantity, sweep, _format(parameter), _format(value), _format(order),
                ]))
    path = Path(path)
    _atomic_write(path, "\n".join(lines) + "\n")
    return path
