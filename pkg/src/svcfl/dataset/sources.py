"""Raw layouts of the four public screening sources and their common form.

Three sources (UCI adults, the Kaggle adult mirror, UCI children) share the
AQ-10 export layout; the Kaggle toddler file uses the Q-CHAT-10 layout.
``harmonize`` maps either onto one shared schema so that every silo holds
the same feature columns, which horizontal federation requires.
"""

from __future__ import annotations

from pathlib import Path

from .csvio import parse_csv
from .schema import (
    BINARY_RESPONSE,
    CATEGORICAL,
    INTEGER,
    LABEL,
    REAL,
    SOURCE_IDS,
    Column,
    Dataset,
    Schema,
    ScreeningRecord,
)

NOT_COLLECTED = "not-collected"

AQ10_SCHEMA = Schema.build(
    [(f"A{i}_Score", BINARY_RESPONSE) for i in range(1, 11)]
    + [
        ("age", REAL),
        ("gender", CATEGORICAL),
        ("ethnicity", CATEGORICAL),
        ("jundice", CATEGORICAL),
        ("austim", CATEGORICAL),
        ("contry_of_res", CATEGORICAL),
        ("used_app_before", CATEGORICAL),
        ("result", INTEGER),
        ("age_desc", CATEGORICAL),
        ("relation", CATEGORICAL),
        ("Class/ASD", LABEL),
    ],
    positive_label_text="YES",
)

QCHAT_SCHEMA = Schema.build(
    [("Case_No", INTEGER)]
    + [(f"A{i}", BINARY_RESPONSE) for i in range(1, 11)]
    + [
        ("Age_Mons", INTEGER),
        ("Qchat-10-Score", INTEGER),
        ("Sex", CATEGORICAL),
        ("Ethnicity", CATEGORICAL),
        ("Jaundice", CATEGORICAL),
        ("Family_mem_with_ASD", CATEGORICAL),
        ("Who completed the test", CATEGORICAL),
        ("Class/ASD Traits", LABEL),
    ],
    positive_label_text="Yes",
)

SOURCE_SCHEMAS = {
    "children-uci": AQ10_SCHEMA,
    "children-kaggle": QCHAT_SCHEMA,
    "adults-uci": AQ10_SCHEMA,
    "adults-kaggle": AQ10_SCHEMA,
}

# Table 1 instance counts (children and adults, each across two sources).
TABLE1_INSTANCES = {"children": 1346, "adults": 1404}

COMMON_EXTRAS = (
    Column("age", REAL),
    Column("gender", CATEGORICAL),
    Column("ethnicity", CATEGORICAL),
    Column("jaundice", CATEGORICAL),
    Column("family_asd", CATEGORICAL),
    Column("country", CATEGORICAL),
    Column("used_app_before", CATEGORICAL),
    Column("test_taker", CATEGORICAL),
    Column("screening_method", CATEGORICAL),
)

COMMON_SCHEMA = Schema(
    tuple([Column(f"R{i}", BINARY_RESPONSE) for i in range(1, 11)] + list(COMMON_EXTRAS) + [Column("asd", LABEL)]),
    positive_label_text="YES",
)

TODDLER_METHOD = "q-chat-10 toddler"


def _text(value):
    if value is None:
        return None
    return " ".join(str(value).replace("-", " ").split()).casefold()


def _label(value, positive: str):
    if value is None:
        return None
    return "YES" if value.strip().casefold() == positive.strip().casefold() else "NO"


def harmonize(d: Dataset) -> Dataset:
    """Map a raw source dataset onto COMMON_SCHEMA.

    Category text is lower-cased with hyphens read as spaces. Fields a
    source never collected hold the ``not-collected`` category, which is
    distinct from a missing cell.
    """
    names = [c.name for c in d.schema.extra_columns]
    positive = d.schema.positive_label_text
    toddler = "Age_Mons" in names
    out = []
    for r in d.records:
        x = dict(zip(names, r.extra_features))
        if toddler:
            months = x["Age_Mons"]
            extras = (
                None if months is None else months / 12.0,
                _text(x["Sex"]),
                _text(x["Ethnicity"]),
                _text(x["Jaundice"]),
                _text(x["Family_mem_with_ASD"]),
                NOT_COLLECTED,
                NOT_COLLECTED,
                _text(x["Who completed the test"]),
                TODDLER_METHOD,
            )
        else:
            age = x["age"]
            extras = (
                None if age is None else float(age),
                _text(x["gender"]),
                _text(x["ethnicity"]),
                _text(x["jundice"]),
                _text(x["austim"]),
                _text(x["contry_of_res"]),
                _text(x["used_app_before"]),
                _text(x["relation"]),
                _text(x["age_desc"]),
            )
        out.append(ScreeningRecord(r.responses, extras, _label(r.label, positive)))
    return Dataset(COMMON_SCHEMA, tuple(out), d.source_id)


def load_source(path, source_id: str) -> Dataset:
    """Read one source file with its raw layout (no harmonization)."""
    if source_id not in SOURCE_IDS:
        raise ValueError(f"unknown source id {source_id!r}")
    raw = Path(path).read_text(encoding="utf-8")
    return parse_csv(raw, SOURCE_SCHEMAS[source_id], source_id)


def default_paths(directory) -> dict[str, Path]:
    """``<directory>/<source-id>.csv`` for each of the four sources."""
    directory = Path(directory)
    return {sid: directory / f"{sid}.csv" for sid in SOURCE_IDS}
