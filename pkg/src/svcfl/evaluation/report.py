"""Text-table and JSON renderings of metric reports."""

from __future__ import annotations

import json
from decimal import ROUND_HALF_UP, Decimal

from ..dataset.csvio import dumps_canonical
from .metrics import MetricsReport

HEADER = ("Method", "Classifier", "PR", "R", "Fs", "Acc")

_CLASSIFIER_NAMES = {"dt": "DT", "rf": "RF", "svc": "SVC"}


def percent(x: float) -> str:
    """Integer percentage, rounded half-up on the decimal form of ``x``."""
    value = (Decimal(repr(float(x))) * 100).quantize(Decimal(1), rounding=ROUND_HALF_UP)
    return f"{int(value)}%"


def method_label(r: MetricsReport) -> str:
    if r.method:
        return r.method
    if r.condition == "raw-single-site":
        return f"Raw Data ({r.site})" if r.site else "Raw Data"
    if r.condition == "pooled-diagnostic":
        return "Pooled (diagnostic)"
    return f"Federated learning ({r.condition})"


def table_rows(reports) -> list[tuple]:
    return [
        (
            method_label(r),
            _CLASSIFIER_NAMES.get(r.classifier_kind, r.classifier_kind),
            percent(r.precision),
            percent(r.recall),
            percent(r.f1_weighted),
            percent(r.accuracy),
        )
        for r in reports
    ]


def render_table(reports) -> str:
    """Fixed-width table; the Fs column holds the support-weighted F1."""
    rows = [HEADER] + table_rows(reports)
    widths = [max(len(row[i]) for row in rows) for i in range(len(HEADER))]
    lines = ["  ".join(cell.ljust(w) for cell, w in zip(row, widths)).rstrip() for row in rows]
    return "\n".join(lines) + "\n"


def render_json(reports) -> bytes:
    return (dumps_canonical({"reports": [r.to_json() for r in reports]}) + "\n").encode("utf-8")


def parse_json(data) -> list[MetricsReport]:
    if isinstance(data, bytes):
        data = data.decode("utf-8")
    return [MetricsReport.from_json(o) for o in json.loads(data)["reports"]]


# Published reference rows as (precision, recall, Fs, accuracy).
PUBLISHED_ROWS = (
    ("Raw Data (Adults)", "dt", (0.85, 0.15, 0.75, 0.62)),
    ("Raw Data (Adults)", "rf", (0.83, 0.49, 0.81, 0.53)),
    ("Raw Data (Adults)", "svc", (0.86, 0.52, 0.82, 0.63)),
    ("Federated learning", "dt", (0.95, 0.94, 0.95, 0.94)),
    ("Federated learning", "rf", (0.95, 0.94, 0.95, 0.94)),
    ("Federated learning", "svc", (0.99, 0.99, 0.99, 0.99)),
)


def published_reports() -> list[MetricsReport]:
    """The published rows as reports, for layout comparison only.

    The published Fs goes into ``f1_weighted`` (the column the table
    renders); ``f1_positive`` is recomputed from precision and recall.
    """
    out = []
    for method, kind, (p, r, fs, acc) in PUBLISHED_ROWS:
        out.append(
            MetricsReport(
                accuracy=acc,
                precision=p,
                recall=r,
                f1_positive=2 * p * r / (p + r),
                f1_weighted=fs,
                n=0,
                condition="raw-single-site" if method.startswith("Raw") else "meta-vote",
                classifier_kind=kind,
                site="adults" if method.startswith("Raw") else "",
                method=method,
            )
        )
    return out
