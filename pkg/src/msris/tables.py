"""Plain result tables and their CSV form.

Every file starts with a ``# schema: <name>/<version>`` comment line, then
a header row.  Floats are written with 12 significant digits.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path

from .errors import MsrisError

SCHEMA_VERSION = 1

SCHEMAS = {
    "scaling": ["sweep", "L", "M", "ML", "pattern", "mean_power_w", "std_err_w", "upper_bound_w", "draws"],
    "summary": ["ML", "L", "M", "pattern", "mode", "A", "B", "mean_sum_rate", "std_err",
                "mean_iterations", "converged_fraction", "trials"],
    "trials": ["ML", "L", "M", "pattern", "mode", "A", "B", "trial", "seed", "sum_rate",
               "iterations", "converged"],
    "trajectory": ["ML", "L", "pattern", "mode", "A", "B", "trial", "iteration", "block", "surrogate"],
}


@dataclass
class Table:
    schema: str
    rows: list = field(default_factory=list)

    @property
    def columns(self) -> list[str]:
        return SCHEMAS[self.schema]

    def column(self, name):
        j = self.columns.index(name)
        return [r[j] for r in self.rows]

    def records(self) -> list[dict]:
        return [dict(zip(self.columns, r)) for r in self.rows]


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return "1" if v else "0"
    if isinstance(v, float):
        if math.isnan(v):
            return ""
        return format(v, ".12g")
    return str(v)


def emit_csv(table: Table, path) -> Path:
    """Write ``table`` to ``path`` as UTF-8 CSV and return the path.

    Raises
    ------
    MsrisError
        If the table has no rows; nothing is written in that case.
    OSError
        If the file cannot be written.
    """
    if not table.rows:
        raise MsrisError(f"refusing to write empty {table.schema} table")
    path = Path(path)
    ncol = len(table.columns)
    with path.open("w", encoding="utf-8", newline="") as fh:
        fh.write(f"# schema: msris.{table.schema}/{SCHEMA_VERSION}\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(table.columns)
        for r in table.rows:
            if len(r) != ncol:
                raise MsrisError(f"row has {len(r)} fields, {table.schema} schema has {ncol}")
            w.writerow([_fmt(v) for v in r])
    return path


def _parse(s: str):
    if s == "":
        return None
    try:
        return int(s)
    except ValueError:
        pass
    try:
        return float(s)
    except ValueError:
        return s


def read_csv(path) -> Table:
    """Parse a file written by :func:`emit_csv`."""
    with Path(path).open(encoding="utf-8", newline="") as fh:
        first = fh.readline().strip()
        if not first.startswith("# schema: msris."):
            raise MsrisError(f"{path}: missing schema line")
        name, version = first.split("msris.", 1)[1].split("/")
        if int(version) != SCHEMA_VERSION or name not in SCHEMAS:
            raise MsrisError(f"{path}: unsupported schema {name}/{version}")
        reader = csv.reader(fh)
        header = next(reader)
        if header != SCHEMAS[name]:
            raise MsrisError(f"{path}: header does not match the {name} schema")
        rows = [tuple(_parse(x) for x in r) for r in reader]
    return Table(name, rows)
