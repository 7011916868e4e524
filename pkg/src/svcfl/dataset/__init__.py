"""Ingestion, repair, encoding, scoring and splitting of screening data."""

from .csvio import dumps_canonical, parse_csv, schema_from_json, schema_to_json, to_csv
from .prepare import (
    DROP_ROW,
    MISSING_POLICIES,
    MODE_IMPUTE,
    EncodingMap,
    apply_encoding,
    count_duplicates,
    decode,
    deduplicate,
    encoded_schema,
    fit_encoding,
    handle_missing,
    label_encode,
    missing_counts,
    qchat_score,
    responses_only,
    stratified_split,
    stratified_split_indices,
)
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
    concat,
)
from .sources import COMMON_SCHEMA, SOURCE_SCHEMAS, TABLE1_INSTANCES, default_paths, harmonize, load_source
