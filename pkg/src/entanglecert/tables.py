"""Result tables and their CSV / JSON-lines serialization."""

from __future__ import annotations

import csv
import io
import json
import math
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, TextIO

import yaml

SIG_DIGITS = 12


@dataclass
class ResultTable:
    columns: list[str]
    rows: list[list[Any]] = field(default_factory=list)
    metadata: dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        for i, row in enumerate(self.rows):
            if len(row) != len(self.columns):
                raise ValueError(f"row {i} has {len(row)} values for {len(self.columns)} columns")

    def append(self, row: list[Any]) -> None:
        if len(row) != len(self.columns):
            raise ValueError(f"row has {len(row)} values for {len(self.columns)} columns")
        self.rows.append(list(row))

    def column(self, name: str) -> list[Any]:
        j = self.columns.index(name)
        return [r[j] for r in self.rows]

    def records(self) -> list[dict[str, Any]]:
        return [dict(zip(self.columns, r)) for r in self.rows]


def _fmt(value: Any) -> str:
    if isinstance(value, bool):
        return "1" if value else "0"
    if isinstance(value, float) or hasattr(value, "dtype"):
        v = float(value)
        if math.isnan(v):
            return "nan"
        return f"{v:.{SIG_DIGITS}g}"
    return str(value)


def _json_value(value: Any) -> Any:
    if isinstance(value, bool):
        return value
    if isinstance(value, (int, str)) or value is None:
        return value
    v = float(value)
    if math.isnan(v) or math.isinf(v):
        return None
    return float(f"{v:.{SIG_DIGITS}g}")


def _metadata_json(meta: dict[str, Any]) -> dict[str, Any]:
    def conv(x):
        if isinstance(x, dict):
            return {k: conv(v) for k, v in x.items()}
        if isinstance(x, (list, tuple)):
            return [conv(v) for v in x]
        if isinstance(x, float):
            return _json_value(x)
        return x

    return conv(meta)


def write_csv(table: ResultTable, stream: TextIO) -> None:
    meta = yaml.safe_dump(_metadata_json(table.metadata), sort_keys=False, default_flow_style=False)
    for line in meta.splitlines():
        stream.write(f"# {line}\n")
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(table.columns)
    for row in table.rows:
        writer.writerow([_fmt(v) for v in row])


def write_jsonl(table: ResultTable, stream: TextIO) -> None:
    head = {"metadata": _metadata_json(table.metadata), "columns": table.columns}
    stream.write(json.dumps(head) + "\n")
    for row in table.rows:
        stream.write(json.dumps({c: _json_value(v) for c, v in zip(table.columns, row)}) + "\n")


def emit(table: ResultTable, fmt: str = "csv", path: str | Path | None = None) -> str:
    """Serialize ``table``; write it to ``path`` (or stdout when None) and return the text."""
    buf = io.StringIO()
    if fmt == "csv":
        write_csv(table, buf)
    elif fmt == "jsonl":
        write_jsonl(table, buf)
    else:
        raise ValueError(f"unknown format {fmt!r}")
    text = buf.getvalue()
    if path is None:
        sys.stdout.write(text)
    else:
        Path(path).write_text(text)
    return text


def _parse_cell(s: str) -> Any:
    try:
        return int(s)
    except ValueError:
        pass
    try:
        return float(s)
    except ValueError:
        return s


def read_csv(text: str) -> ResultTable:
    meta_lines, body = [], []
    for line in text.splitlines():
        if line.startswith("#"):
            meta_lines.append(line[2:] if line.startswith("# ") else line[1:])
        else:
            body.append(line)
    meta = yaml.safe_load("\n".join(meta_lines)) or {}
    reader = csv.reader(body)
    columns = next(reader, [])
    rows = [[_parse_cell(c) for c in r] for r in reader if r]
    return ResultTable(columns, rows, meta)


def read_jsonl(text: str) -> ResultTable:
    lines = [json.loads(ln) for ln in text.splitlines() if ln.strip()]
    head = lines[0] if lines else {}
    meta = head.get("metadata", {})
    records = lines[1:]
    columns = head.get("columns") or (list(records[0]) if records else [])
    rows = [[math.nan if r[c] is None else r[c] for c in columns] for r in records]
    return ResultTable(columns, rows, meta)
