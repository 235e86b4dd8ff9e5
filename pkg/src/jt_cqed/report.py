"""Result tables and their CSV / JSON serialisation."""

import csv
import io
import json
import math
import sys
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence, TextIO

from .errors import ConfigError

FORMATS = ("csv", "json")


@dataclass
class ResultTable:
    """Named numeric columns, row-major values and a metadata mapping."""

    columns: List[str]
    rows: List[List[float]] = field(default_factory=list)
    metadata: Dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        width = len(self.columns)
        for i, row in enumerate(self.rows):
            if len(row) != width:
                raise ValueError(f"row {i} has {len(row)} values, expected {width}")

    def column(self, name: str) -> List[float]:
        idx = self.columns.index(name)
        return [row[idx] for row in self.rows]


def format_float(x: float) -> str:
    """12 significant digits, lowercase scientific notation."""
    x = float(x)
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    if x == 0.0:
        x = 0.0  # drop the sign of -0.0
    return format(x, ".11e")


def _json_default(obj):
    # numpy scalars and arrays
    if hasattr(obj, "tolist"):
        return obj.tolist()
    raise TypeError(f"cannot serialise {type(obj).__name__}")


def _dumps(value: Any, **kwargs) -> str:
    return json.dumps(value, sort_keys=True, default=_json_default, **kwargs)


def to_csv(table: ResultTable) -> str:
    """
    Render a table as CSV.

    A ``# key: <json>`` preamble line per metadata key (sorted) precedes the
    header row. Identical tables always render to identical bytes.
    """
    buf = io.StringIO()
    for key in sorted(table.metadata):
        buf.write(f"# {key}: {_dumps(table.metadata[key])}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(table.columns)
    for row in table.rows:
        writer.writerow([format_float(v) for v in row])
    return buf.getvalue()


def to_json(table: ResultTable) -> str:
    """``{"columns", "rows", "metadata"}`` with sorted keys; floats keep full precision."""
    doc = {
        "columns": list(table.columns),
        "rows": [[float(v) for v in row] for row in table.rows],
        "metadata": table.metadata,
    }
    return _dumps(doc, indent=2) + "\n"


def from_json(text: str) -> ResultTable:
    doc = json.loads(text)
    return ResultTable(columns=doc["columns"], rows=doc["rows"], metadata=doc["metadata"])


def from_csv(text: str) -> ResultTable:
    """Parse the output of ``to_csv`` back into a table."""
    metadata: Dict[str, Any] = {}
    body = []
    for line in text.splitlines():
        if line.startswith("# "):
            key, _, value = line[2:].partition(": ")
            metadata[key] = json.loads(value)
        elif line:
            body.append(line)
    reader = csv.reader(body)
    columns = next(reader)
    rows = [[float(v) for v in row] for row in reader]
    return ResultTable(columns=columns, rows=rows, metadata=metadata)


def render(table: ResultTable, fmt: str) -> str:
    if fmt == "csv":
        return to_csv(table)
    if fmt == "json":
        return to_json(table)
    raise ConfigError(f"format must be one of {', '.join(FORMATS)}, got {fmt!r}", field="format")


def write_report(
    table: ResultTable,
    output_file: Optional[str] = None,
    fmt: str = "csv",
    stream: Optional[TextIO] = None,
) -> Dict[str, Any]:
    """
    Write a result table and return a summary.

    Args:
        table: Table to serialise
        output_file: Destination path; stdout (or `stream`) when None
        fmt: "csv" or "json"
        stream: Alternative text stream used when no output file is given

    Returns:
        Dictionary with row/column counts, format and the destination
    """
    text = render(table, fmt)
    if output_file is None:
        (stream or sys.stdout).write(text)
        destination = "<stdout>"
    else:
        try:
            with open(output_file, "w", encoding="utf-8", newline="") as f:
                f.write(text)
        except OSError as exc:
            raise ConfigError(f"cannot write output: {exc}", field="output.path") from None
        destination = output_file

    return {
        "rows": len(table.rows),
        "columns": len(table.columns),
        "format": fmt,
        "report_file": destination,
    }


def column_names(prefix: str, count: int) -> Sequence[str]:
    return [f"{prefix}{i}" for i in range(count)]
