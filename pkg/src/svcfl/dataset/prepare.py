"""Cleaning, encoding, scoring and splitting of screening datasets."""

from __future__ import annotations

import statistics
from collections import Counter
from dataclasses import dataclass, field

import numpy as np

from ..errors import ImputationError, StratificationError
from .schema import (
    CATEGORICAL,
    INTEGER,
    REAL,
    Column,
    Dataset,
    Schema,
    ScreeningRecord,
)

QCHAT_THRESHOLD = 3

_ASCII_LOWER = str.maketrans("ABCDEFGHIJKLMNOPQRSTUVWXYZ", "abcdefghijklmnopqrstuvwxyz")


def _dedup_key(record: ScreeningRecord) -> tuple:
    return tuple(c.strip().translate(_ASCII_LOWER) if isinstance(c, str) else c for c in record.cells())


def deduplicate(d: Dataset) -> Dataset:
    """Drop later exact duplicates, keeping first occurrences in order.

    Text cells compare after whitespace trim and ASCII case folding.
    """
    seen = set()
    kept = []
    for r in d.records:
        key = _dedup_key(r)
        if key not in seen:
            seen.add(key)
            kept.append(r)
    return d.with_records(kept)


def count_duplicates(d: Dataset) -> int:
    return len(d) - len(deduplicate(d))


DROP_ROW = "drop-row"
MODE_IMPUTE = "mode-impute"
MISSING_POLICIES = (DROP_ROW, MODE_IMPUTE)


def missing_counts(d: Dataset) -> dict[str, int]:
    """Missing-cell count per column name."""
    schema = d.schema
    ordered = schema.response_columns + schema.extra_columns + [schema.label_column]
    counts = dict.fromkeys((c.name for c in ordered), 0)
    for r in d.records:
        for col, value in zip(ordered, r.cells()):
            if value is None:
                counts[col.name] += 1
    return counts


def _fill_value(values, column: Column):
    observed = [v for v in values if v is not None]
    if not observed:
        raise ImputationError(f"column {column.name!r} is entirely missing")
    if column.kind == REAL:
        return float(statistics.median(observed))
    if column.kind == INTEGER:
        return statistics.median_low(observed)
    counts = Counter(observed)
    top = max(counts.values())
    # ties go to the smallest value so the result does not depend on row order
    return min((v for v, n in counts.items() if n == top), key=lambda v: (str(type(v)), v))


def handle_missing(d: Dataset, policy: str = DROP_ROW) -> Dataset:
    """Remove or fill missing cells.

    ``drop-row`` keeps only complete records. ``mode-impute`` fills
    categorical and response cells with the column mode and numeric cells
    with the column median; records whose label is missing are dropped
    under both policies since a label is never imputed.
    """
    if policy not in MISSING_POLICIES:
        raise ValueError(f"unknown missing-value policy {policy!r}")
    if policy == DROP_ROW:
        return d.with_records(r for r in d.records if r.is_complete())

    labelled = [r for r in d.records if r.label is not None]
    if not any(not r.is_complete() for r in labelled):
        return d.with_records(labelled)
    schema = d.schema
    resp_fill = [None] * len(schema.response_columns)
    extra_fill = [None] * len(schema.extra_columns)
    for j, col in enumerate(schema.response_columns):
        column_values = [r.responses[j] for r in labelled]
        if None in column_values:
            resp_fill[j] = _fill_value(column_values, col)
    for j, col in enumerate(schema.extra_columns):
        column_values = [r.extra_features[j] for r in labelled]
        if None in column_values:
            extra_fill[j] = _fill_value(column_values, col)

    out = []
    for r in labelled:
        if r.is_complete():
            out.append(r)
            continue
        out.append(
            ScreeningRecord(
                responses=tuple(resp_fill[j] if v is None else v for j, v in enumerate(r.responses)),
                extra_features=tuple(extra_fill[j] if v is None else v for j, v in enumerate(r.extra_features)),
                label=r.label,
            )
        )
    return d.with_records(out)


@dataclass
class EncodingMap:
    """Per-column category → code tables plus the label table."""

    columns: dict[str, dict[str, int]] = field(default_factory=dict)
    label: dict[str, int] = field(default_factory=dict)

    def to_json(self) -> dict:
        return {"columns": self.columns, "label": self.label}

    @classmethod
    def from_json(cls, obj) -> "EncodingMap":
        return cls(
            columns={k: {t: int(c) for t, c in v.items()} for k, v in obj["columns"].items()},
            label={t: int(c) for t, c in obj["label"].items()},
        )

    def decoder(self, column: str) -> dict[int, str]:
        return {code: text for text, code in self.columns[column].items()}


def fit_encoding(datasets) -> EncodingMap:
    """Lexicographic category codes over every dataset given.

    Fitting on the union of silos gives every client the same codes.
    """
    datasets = list(datasets)
    schema = datasets[0].schema
    emap = EncodingMap()
    for j, col in enumerate(schema.extra_columns):
        if col.kind != CATEGORICAL:
            continue
        values = {r.extra_features[j] for d in datasets for r in d.records if r.extra_features[j] is not None}
        emap.columns[col.name] = {text: code for code, text in enumerate(sorted(values))}
    positive = schema.positive_label_text.strip().casefold()
    labels = {r.label for d in datasets for r in d.records if r.label is not None}
    emap.label = {text: int(str(text).strip().casefold() == positive) for text in sorted(labels, key=str)}
    return emap


def encoded_schema(schema: Schema) -> Schema:
    extras = [Column(c.name, INTEGER) if c.kind == CATEGORICAL else c for c in schema.extra_columns]
    return Schema(tuple(schema.response_columns + extras + [schema.label_column]), "1")


def apply_encoding(d: Dataset, emap: EncodingMap) -> Dataset:
    schema = d.schema
    tables = [emap.columns.get(c.name) if c.kind == CATEGORICAL else None for c in schema.extra_columns]
    out = []
    for r in d.records:
        extras = tuple(
            table[v] if table is not None and v is not None else v for table, v in zip(tables, r.extra_features)
        )
        label = r.label if r.label is None else emap.label[r.label]
        out.append(ScreeningRecord(r.responses, extras, label))
    return Dataset(encoded_schema(schema), tuple(out), d.source_id)


def label_encode(d: Dataset) -> tuple[Dataset, EncodingMap]:
    """Replace category text by integer codes; positive label text becomes 1."""
    emap = fit_encoding([d])
    return apply_encoding(d, emap), emap


def decode(d: Dataset, emap: EncodingMap, schema: Schema) -> Dataset:
    """Inverse of apply_encoding for categorical cells and the label.

    ``schema`` is the pre-encoding schema. Decoding the label requires one
    text per code in the label table.
    """
    tables = [emap.decoder(c.name) if c.kind == CATEGORICAL else None for c in schema.extra_columns]
    label_back = {}
    for text, code in emap.label.items():
        label_back.setdefault(code, text)
    out = []
    for r in d.records:
        extras = tuple(
            table[v] if table is not None and v is not None else v for table, v in zip(tables, r.extra_features)
        )
        label = r.label if r.label is None else label_back[r.label]
        out.append(ScreeningRecord(r.responses, extras, label))
    return Dataset(schema, tuple(out), d.source_id)


def qchat_score(responses) -> tuple[int, int]:
    """Sum of ten yes(1)/no(0) responses, and the flag ``score > 3``."""
    responses = tuple(responses)
    if len(responses) != 10 or any(v not in (0, 1) for v in responses):
        raise ValueError("qchat_score needs ten 0/1 responses")
    score = int(sum(responses))
    return score, int(score > QCHAT_THRESHOLD)


def _round_half_up(x: float) -> int:
    return int(np.floor(x + 0.5 + 1e-9))


def stratified_split_indices(labels, test_fraction: float, seed: int) -> tuple[np.ndarray, np.ndarray]:
    """Train and test index arrays, each sorted ascending.

    Each label contributes round_half_up(test_fraction * count) test rows,
    chosen by a permutation from ``numpy.random.default_rng(seed)``.
    """
    if not 0.0 < test_fraction < 1.0:
        raise ValueError("test_fraction must lie in (0, 1)")
    labels = np.asarray(labels)
    classes = np.unique(labels)
    if len(classes) < 2:
        raise StratificationError("stratified split needs both labels present")
    rng = np.random.default_rng(seed)
    test = []
    for cls in classes:
        idx = np.flatnonzero(labels == cls)
        k = _round_half_up(test_fraction * len(idx))
        test.extend(idx[rng.permutation(len(idx))[:k]].tolist())
    test_idx = np.array(sorted(test), dtype=np.int64)
    mask = np.ones(len(labels), dtype=bool)
    mask[test_idx] = False
    return np.flatnonzero(mask), test_idx


def stratified_split(d: Dataset, test_fraction: float = 0.2, seed: int = 42) -> tuple[Dataset, Dataset]:
    """Seeded train/test partition preserving per-label proportions."""
    labels = [r.label for r in d.records]
    if any(v is None for v in labels):
        raise StratificationError("records with a missing label cannot be stratified")
    train_idx, test_idx = stratified_split_indices(labels, test_fraction, seed)
    return d.select(train_idx), d.select(test_idx)


def responses_only(d: Dataset) -> Dataset:
    """Drop every extra feature, keeping R1 to R10 and the label."""
    schema = d.schema.with_extras([])
    return Dataset(schema, tuple(ScreeningRecord(r.responses, (), r.label) for r in d.records), d.source_id)


