"""Tidy-table serialisation to CSV and JSON.

Floats are written with ``%.12e`` so identical runs give identical bytes.
Missing values (pole rows, failed samples) are empty in CSV and null in JSON;
NaN is never written.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field

FLOAT_FMT = "%.12e"


@dataclass
class Table:
    command: str
    columns: list[str]
    rows: list[tuple] = field(default_factory=list)

    def add(self, *values):
        if len(values) != len(self.columns):
            raise ValueError(f"expected {len(self.columns)} values, got {len(values)}")
        self.rows.append(tuple(values))


def _cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return "" if not math.isfinite(value) else FLOAT_FMT % value
    return str(value)


def _json_value(value):
    if value is None or isinstance(value, bool) or isinstance(value, int):
        return value
    if isinstance(value, float):
        return float(FLOAT_FMT % value) if math.isfinite(value) else None
    return str(value)


def to_csv(table: Table) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(table.columns)
    for row in table.rows:
        writer.writerow([_cell(v) for v in row])
    return buf.getvalue()


def to_json(table: Table) -> str:
    doc = {
        "command": table.command,
        "columns": list(table.columns),
        "rows": [{c: _json_value(v) for c, v in zip(table.columns, row)} for row in table.rows],
    }
    return json.dumps(doc, indent=1) + "\n"


def render(table: Table, fmt: str) -> str:
    if fmt == "csv":
        return to_csv(table)
    if fmt == "json":
        return to_json(table)
    raise ValueError(f"unknown format {fmt!r}")


def _parse_cell(text: str):
    if text == "":
        return None
    for conv in (int, float):
        try:
            return conv(text)
        except ValueError:
            pass
    if text in ("true", "false"):
        return text == "true"
    return text


def read_csv(text: str) -> tuple[list[str], list[list]]:
    rows = list(csv.reader(io.StringIO(text)))
    return rows[0], [[_parse_cell(c) for c in r] for r in rows[1:]]


def read_json(text: str) -> tuple[list[str], list[list]]:
    doc = json.loads(text)
    cols = doc["columns"]
    return cols, [[r[c] for c in cols] for r in doc["rows"]]
