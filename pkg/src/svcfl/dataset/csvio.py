"""CSV ingestion and canonical CSV / JSON output."""

from __future__ import annotations

import csv
import io
import json
import math

from ..errors import CellError, SchemaError
from .schema import (
    BINARY_RESPONSE,
    INTEGER,
    REAL,
    Dataset,
    Schema,
    ScreeningRecord,
)

MISSING_TOKENS = ("", "?")
_YES = {"1", "yes", "y", "true"}
_NO = {"0", "no", "n", "false"}


def _parse_cell(text, kind, row, column):
    text = text.strip()
    if text in MISSING_TOKENS:
        return None
    if kind == BINARY_RESPONSE:
        low = text.lower()
        if low in _YES:
            return 1
        if low in _NO:
            return 0
        raise CellError(row, column, text, "expected a 0/1 response, got")
    if kind == INTEGER:
        try:
            return int(text)
        except ValueError:
            try:
                value = float(text)
            except ValueError:
                raise CellError(row, column, text) from None
            if not value.is_integer():
                raise CellError(row, column, text, "expected an integer, got")
            return int(value)
    if kind == REAL:
        try:
            value = float(text)
        except ValueError:
            raise CellError(row, column, text) from None
        if not math.isfinite(value):
            raise CellError(row, column, text, "non-finite value")
        return value
    # categorical and label cells stay as text until encoded
    return text


def parse_csv(raw: str, schema: Schema, source_id: str = "children-uci") -> Dataset:
    """Parse CSV text into a Dataset.

    The header must name exactly the schema's columns, in any order. Empty
    cells and ``?`` are read as missing (``None``). Data rows keep their file
    order; row numbers in errors count data rows from 1.
    """
    reader = csv.reader(io.StringIO(raw.lstrip("﻿")))
    try:
        header = [h.strip() for h in next(reader)]
    except StopIteration:
        raise SchemaError("empty input: no header row") from None
    if sorted(header) != sorted(schema.names) or len(set(header)) != len(header):
        missing = sorted(set(schema.names) - set(header))
        unexpected = sorted(set(header) - set(schema.names))
        raise SchemaError(f"header mismatch: missing {missing}, unexpected {unexpected}")
    position = {name: i for i, name in enumerate(header)}

    resp_cols = schema.response_columns
    extra_cols = schema.extra_columns
    label_col = schema.label_column
    records = []
    for row_no, row in enumerate(reader, start=1):
        if not row or all(not cell.strip() for cell in row):
            continue
        if len(row) != len(header):
            raise CellError(row_no, "*", ",".join(row), f"expected {len(header)} cells, got")

        def cell(col):
            return _parse_cell(row[position[col.name]], col.kind, row_no, col.name)

        records.append(
            ScreeningRecord(
                responses=tuple(cell(c) for c in resp_cols),
                extra_features=tuple(cell(c) for c in extra_cols),
                label=cell(label_col),
            )
        )
    return Dataset(schema, tuple(records), source_id)


def _format_cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


def to_csv(d: Dataset) -> str:
    """Canonical CSV: schema column order, LF endings, quoting only when needed."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n", quoting=csv.QUOTE_MINIMAL)
    schema = d.schema
    ordered = schema.response_columns + schema.extra_columns + [schema.label_column]
    writer.writerow([c.name for c in ordered])
    for r in d.records:
        writer.writerow([_format_cell(v) for v in r.cells()])
    return buf.getvalue()


def canonical_schema_order(schema: Schema) -> Schema:
    """Reorder columns as responses, extras, label (the to_csv layout)."""
    return Schema(
        tuple(schema.response_columns + schema.extra_columns + [schema.label_column]),
        schema.positive_label_text,
    )


def schema_to_json(schema: Schema) -> dict:
    return {
        "columns": [[c.name, c.kind] for c in schema.columns],
        "positive_label_text": schema.positive_label_text,
    }


def schema_from_json(obj: dict) -> Schema:
    return Schema.build([tuple(p) for p in obj["columns"]], obj["positive_label_text"])


def dumps_canonical(obj) -> str:
    """Sorted-key compact JSON; floats use the shortest round-trip repr."""
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), allow_nan=False, ensure_ascii=False)


