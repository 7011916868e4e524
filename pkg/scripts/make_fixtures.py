"""Generate the synthetic stand-ins for the four public screening files.

The files reuse the real column layouts and instance counts but every row is
drawn from a seeded generator. Labels follow each instrument's published
cut-off (AQ-10: score above 6, Q-CHAT-10: score above 3) with a small share
of flipped labels. Part of the Kaggle adult file is a verbatim copy of the
UCI adult file, and a few cells hold "?" as the public files do.

    python3 scripts/make_fixtures.py [out_dir]
"""

from __future__ import annotations

import csv
import sys
from pathlib import Path

import numpy as np

from svcfl.dataset.sources import AQ10_SCHEMA, QCHAT_SCHEMA

SEED = 20240117
COUNTS = {"adults-uci": 704, "adults-kaggle": 700, "children-uci": 292, "children-kaggle": 1054}
# rows of adults-kaggle copied from adults-uci
N_COPIED = 260
LABEL_NOISE = 0.02
MISSING_RATE = 0.015

ETHNICITIES = ["White-European", "Asian", "Middle Eastern ", "Black", "South Asian", "Hispanic", "Latino", "Others"]
COUNTRIES = ["United States", "United Kingdom", "India", "New Zealand", "Jordan", "Australia", "Canada", "Egypt"]
RELATIONS = ["Self", "Parent", "Relative", "Health care professional", "Others"]
TODDLER_TAKERS = ["family member", "Health Care Professional", "Self", "Others"]


def _responses(rng, n, a, b):
    # per-respondent propensity, then ten independent items
    p = rng.beta(a, b, size=n)
    return (rng.random((n, 10)) < p[:, None]).astype(int)


def _labels(rng, scores, cutoff):
    y = scores > cutoff
    flip = rng.random(len(y)) < LABEL_NOISE
    return np.where(flip, ~y, y)


def _maybe_missing(rng, value):
    return "?" if rng.random() < MISSING_RATE else value


def aq10_rows(rng, n, ages, age_desc, beta):
    resp = _responses(rng, n, *beta)
    score = resp.sum(axis=1)
    label = _labels(rng, score, 6)
    rows = []
    for i in range(n):
        rows.append(
            {
                **{f"A{j + 1}_Score": str(resp[i, j]) for j in range(10)},
                "age": _maybe_missing(rng, str(int(rng.integers(*ages)))),
                "gender": rng.choice(["m", "f"]),
                "ethnicity": _maybe_missing(rng, rng.choice(ETHNICITIES)),
                "jundice": rng.choice(["yes", "no"], p=[0.12, 0.88]),
                "austim": rng.choice(["yes", "no"], p=[0.15, 0.85]),
                "contry_of_res": rng.choice(COUNTRIES),
                "used_app_before": rng.choice(["yes", "no"], p=[0.05, 0.95]),
                "result": str(score[i]),
                "age_desc": age_desc,
                "relation": _maybe_missing(rng, rng.choice(RELATIONS)),
                "Class/ASD": "YES" if label[i] else "NO",
            }
        )
    return rows


def qchat_rows(rng, n):
    resp = _responses(rng, n, 2.2, 1.6)
    score = resp.sum(axis=1)
    label = _labels(rng, score, 3)
    rows = []
    for i in range(n):
        rows.append(
            {
                "Case_No": str(i + 1),
                **{f"A{j + 1}": str(resp[i, j]) for j in range(10)},
                "Age_Mons": str(int(rng.integers(12, 37))),
                "Qchat-10-Score": str(score[i]),
                "Sex": rng.choice(["m", "f"]),
                "Ethnicity": _maybe_missing(rng, rng.choice(ETHNICITIES)),
                "Jaundice": rng.choice(["yes", "no"], p=[0.27, 0.73]),
                "Family_mem_with_ASD": rng.choice(["yes", "no"], p=[0.16, 0.84]),
                "Who completed the test": rng.choice(TODDLER_TAKERS, p=[0.9, 0.05, 0.03, 0.02]),
                "Class/ASD Traits": "Yes" if label[i] else "No",
            }
        )
    return rows


def write(path: Path, header, rows):
    with path.open("w", encoding="utf-8", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=header, lineterminator="\n")
        w.writeheader()
        w.writerows(rows)


def generate(out_dir) -> dict[str, Path]:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(SEED)
    adults = aq10_rows(rng, COUNTS["adults-uci"], (18, 65), "18 and more", (1.2, 2.2))
    fresh = aq10_rows(rng, COUNTS["adults-kaggle"] - N_COPIED, (18, 65), "18 and more", (1.2, 2.2))
    copied = [adults[int(i)] for i in sorted(rng.choice(len(adults), N_COPIED, replace=False))]
    kaggle = fresh + copied
    kaggle = [kaggle[int(i)] for i in rng.permutation(len(kaggle))]
    children = aq10_rows(rng, COUNTS["children-uci"], (4, 12), "4-11 years", (1.8, 1.9))
    toddlers = qchat_rows(rng, COUNTS["children-kaggle"])
    paths = {}
    for sid, schema, rows in (
        ("adults-uci", AQ10_SCHEMA, adults),
        ("adults-kaggle", AQ10_SCHEMA, kaggle),
        ("children-uci", AQ10_SCHEMA, children),
        ("children-kaggle", QCHAT_SCHEMA, toddlers),
    ):
        paths[sid] = out / f"{sid}.csv"
        write(paths[sid], schema.names, rows)
    return paths


if __name__ == "__main__":
    target = sys.argv[1] if len(sys.argv) > 1 else Path(__file__).resolve().parent.parent / "fixtures"
    for sid, p in generate(target).items():
        print(sid, p)
