"""End-to-end preparation of the four silos for training."""

from __future__ import annotations

from dataclasses import dataclass, field

from ..config import FEATURE_MODES
from .prepare import (
    DROP_ROW,
    EncodingMap,
    _dedup_key,
    apply_encoding,
    deduplicate,
    fit_encoding,
    handle_missing,
    missing_counts,
    responses_only,
)
from .schema import SOURCE_IDS
from .sources import harmonize, load_source



@dataclass
class QualityReport:
    """Per-source duplicate and missing-cell counts gathered during ingest."""

    rows_read: dict = field(default_factory=dict)
    duplicates_removed: dict = field(default_factory=dict)
    cross_source_duplicates: dict = field(default_factory=dict)
    missing: dict = field(default_factory=dict)
    rows_dropped_missing: dict = field(default_factory=dict)
    rows_kept: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {
            "rows_read": self.rows_read,
            "duplicates_removed": self.duplicates_removed,
            "cross_source_duplicates": self.cross_source_duplicates,
            "missing": self.missing,
            "rows_dropped_missing": self.rows_dropped_missing,
            "rows_kept": self.rows_kept,
        }


@dataclass(frozen=True)
class PreparedSilos:
    silos: tuple
    encoding: EncodingMap
    report: QualityReport


def prepare_silos(
    raw: dict,
    missing_policy: str = DROP_ROW,
    feature_mode: str = "full",
) -> PreparedSilos:
    """Harmonize, deduplicate, repair and encode raw source datasets.

    ``raw`` maps source id to a raw-layout Dataset (see ``load_source``).
    Duplicates are removed within each source and then across sources in
    ``SOURCE_IDS`` order, so a row shared by two files stays with the one
    listed first. Codes are fitted on the union of all silos so every
    client shares one feature space.
    """
    if feature_mode not in FEATURE_MODES:
        raise ValueError(f"unknown feature mode {feature_mode!r}")
    order = [sid for sid in SOURCE_IDS if sid in raw]
    report = QualityReport()
    seen: set = set()
    cleaned = {}
    for sid in order:
        d = harmonize(raw[sid])
        report.rows_read[sid] = len(d)
        report.missing[sid] = missing_counts(d)
        own = deduplicate(d)
        report.duplicates_removed[sid] = len(d) - len(own)
        kept = []
        for r in own.records:
            key = _dedup_key(r)
            if key not in seen:
                seen.add(key)
                kept.append(r)
        report.cross_source_duplicates[sid] = len(own) - len(kept)
        d = own.with_records(kept)
        repaired = handle_missing(d, missing_policy)
        report.rows_dropped_missing[sid] = len(d) - len(repaired)
        cleaned[sid] = repaired
    emap = fit_encoding(list(cleaned.values()))
    silos = []
    for sid in order:
        enc = apply_encoding(cleaned[sid], emap)
        if feature_mode == "responses-only":
            enc = responses_only(enc)
        report.rows_kept[sid] = len(enc)
        silos.append(enc)
    return PreparedSilos(tuple(silos), emap, report)


def load_sources(paths: dict) -> dict:
    """Read every ``{source_id: path}`` entry with its raw layout."""
    return {sid: load_source(p, sid) for sid, p in paths.items()}
