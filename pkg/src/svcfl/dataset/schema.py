"""Column schema, record and dataset containers."""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Union

import numpy as np

from ..errors import SchemaError

BINARY_RESPONSE = "binary-response"
INTEGER = "integer"
REAL = "real"
CATEGORICAL = "categorical"
LABEL = "label"
KINDS = (BINARY_RESPONSE, INTEGER, REAL, CATEGORICAL, LABEL)

N_RESPONSES = 10

SOURCE_IDS = ("children-uci", "children-kaggle", "adults-uci", "adults-kaggle")

# A cell is a parsed number, a category string, or None when missing.
Cell = Union[int, float, str, None]


@dataclass(frozen=True)
class Column:
    name: str
    kind: str

    def __post_init__(self):
        if self.kind not in KINDS:
            raise SchemaError(f"unknown column kind {self.kind!r} for {self.name!r}")


@dataclass(frozen=True)
class Schema:
    columns: tuple[Column, ...]
    positive_label_text: str = "YES"

    def __post_init__(self):
        object.__setattr__(self, "columns", tuple(self.columns))
        names = [c.name for c in self.columns]
        if len(set(names)) != len(names):
            raise SchemaError("column names must be unique")
        n_label = sum(c.kind == LABEL for c in self.columns)
        if n_label != 1:
            raise SchemaError(f"expected exactly one label column, found {n_label}")
        n_resp = sum(c.kind == BINARY_RESPONSE for c in self.columns)
        if n_resp != N_RESPONSES:
            raise SchemaError(f"expected {N_RESPONSES} binary-response columns, found {n_resp}")

    @classmethod
    def build(cls, pairs, positive_label_text="YES"):
        return cls(tuple(Column(n, k) for n, k in pairs), positive_label_text)

    @property
    def names(self) -> list[str]:
        return [c.name for c in self.columns]

    @property
    def response_columns(self) -> list[Column]:
        return [c for c in self.columns if c.kind == BINARY_RESPONSE]

    @property
    def extra_columns(self) -> list[Column]:
        return [c for c in self.columns if c.kind not in (BINARY_RESPONSE, LABEL)]

    @property
    def label_column(self) -> Column:
        return next(c for c in self.columns if c.kind == LABEL)

    def with_extras(self, extras: list[Column]) -> "Schema":
        """Same responses and label, different extra columns."""
        cols = self.response_columns + list(extras) + [self.label_column]
        return Schema(tuple(cols), self.positive_label_text)


@dataclass(frozen=True)
class ScreeningRecord:
    """One respondent: ten item responses, extra features, and the label.

    Before encoding, extras may hold category text and the label holds the
    raw label text; missing cells are ``None`` throughout.
    """

    responses: tuple
    extra_features: tuple = ()
    label: Cell = None

    def cells(self) -> tuple:
        return (*self.responses, *self.extra_features, self.label)

    def is_complete(self) -> bool:
        return all(c is not None for c in self.cells())


@dataclass(frozen=True)
class Dataset:
    schema: Schema
    records: tuple[ScreeningRecord, ...] = field(default_factory=tuple)
    source_id: str = "children-uci"

    def __post_init__(self):
        object.__setattr__(self, "records", tuple(self.records))
        if self.source_id not in SOURCE_IDS and self.source_id != "union":
            raise SchemaError(f"unknown source id {self.source_id!r}")
        n_extra = len(self.schema.extra_columns)
        for r in self.records:
            if len(r.responses) != N_RESPONSES or len(r.extra_features) != n_extra:
                raise SchemaError("record arity does not match schema")

    def __len__(self):
        return len(self.records)

    def __iter__(self):
        return iter(self.records)

    def with_records(self, records) -> "Dataset":
        return replace(self, records=tuple(records))

    def select(self, indices) -> "Dataset":
        recs = self.records
        return self.with_records(recs[i] for i in indices)

    @property
    def n_features(self) -> int:
        return N_RESPONSES + len(self.schema.extra_columns)

    def labels(self) -> np.ndarray:
        return np.array([r.label for r in self.records], dtype=np.int64)

    def to_arrays(self) -> tuple[np.ndarray, np.ndarray]:
        """Feature matrix (responses then extras) and 0/1 label vector.

        Only valid on an encoded, fully populated dataset.
        """
        n = len(self.records)
        X = np.empty((n, self.n_features), dtype=np.float64)
        for i, r in enumerate(self.records):
            X[i] = (*r.responses, *r.extra_features)
        return X, self.labels()

    def check_encoded(self) -> None:
        """Raise SchemaError unless every record is numeric, complete and 0/1 labelled."""
        for i, r in enumerate(self.records):
            if any(v not in (0, 1) for v in r.responses):
                raise SchemaError(f"record {i}: responses must be 0/1")
            if r.label not in (0, 1):
                raise SchemaError(f"record {i}: label must be 0/1")
            for v in r.extra_features:
                if isinstance(v, str) or v is None:
                    raise SchemaError(f"record {i}: extra features are not encoded")


def concat(datasets, source_id="union") -> Dataset:
    """Concatenate datasets sharing one schema, preserving order."""
    datasets = list(datasets)
    if not datasets:
        raise SchemaError("nothing to concatenate")
    schema = datasets[0].schema
    for d in datasets[1:]:
        if d.schema != schema:
            raise SchemaError(f"schema mismatch between {datasets[0].source_id} and {d.source_id}")
    records = [r for d in datasets for r in d.records]
    return Dataset(schema, tuple(records), source_id)
