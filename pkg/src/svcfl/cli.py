"""Command-line pipeline: ingest, train-local, federate, report.

Exit codes: 0 success, 2 usage or configuration error, 3 training failure,
4 missing artifact.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .classifiers.params import model_kind, train_model
from .classifiers.svc import svc_train
from .config import AGGREGATIONS, CLASSIFIER_KINDS, FEATURE_MODES, RoundConfig, RunConfig, TrainConfig
from .dataset.csvio import dumps_canonical, parse_csv, schema_from_json, schema_to_json, to_csv
from .dataset.ingest import prepare_silos
from .dataset.prepare import MISSING_POLICIES, stratified_split_indices
from .dataset.schema import SOURCE_IDS, concat
from .dataset.sources import default_paths, load_source
from .errors import CellError, SchemaError, SvcflError, TrainingError
from .evaluation.experiment import Cell, CellFailure, ExperimentOptions, default_cells, run_experiment_matrix
from .evaluation.report import published_reports, render_json, render_table
from .federation.aggregate import EnsembleMember, GlobalModel, global_from_json
from .federation.engine import ClientState, dumps_global, dumps_round_log, federate

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_TRAINING = 3
EXIT_MISSING = 4

SPLIT_SEED = 42
PREPARED = "prepared"
SCHEMA_FILE = "schema.json"
ENCODING_FILE = "encoding.json"
QUALITY_FILE = "quality.json"
SPLIT_FILE = "split.json"
MODEL_FILE = "global-model.json"
ROUND_LOG_FILE = "round-log.jsonl"
REPORT_FILE = "report.json"


class UsageError(Exception):
    pass


class MissingArtifact(Exception):
    pass


def _common(parser, suppress):
    default = argparse.SUPPRESS if suppress else None
    parser.add_argument("--seed", type=int, default=default, help="training seed (64-bit, non-negative)")
    parser.add_argument("--config", default=default, help="JSON file with flat RunConfig keys")
    parser.add_argument("--out-dir", default=default, help="artifact directory")
    parser.add_argument("--format", choices=("table", "json"), default=default, help="stdout format")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="svcfl", description=__doc__.splitlines()[0])
    _common(parser, suppress=False)
    sub = parser.add_subparsers(dest="command", required=True)

    ingest = sub.add_parser("ingest", help="repair, encode and split the four sources")
    _common(ingest, suppress=True)
    ingest.add_argument("--data-dir", help="directory holding <source-id>.csv files")
    ingest.add_argument("--source", action="append", default=[], metavar="ID=PATH", help="one source file")
    ingest.add_argument("--missing-policy", choices=MISSING_POLICIES)
    ingest.add_argument("--feature-mode", choices=FEATURE_MODES)

    def training_flags(p):
        _common(p, suppress=True)
        p.add_argument("--classifier", choices=CLASSIFIER_KINDS)
        p.add_argument("--n-rounds", type=int)
        p.add_argument("--local-epochs", type=int)

    local = sub.add_parser("train-local", help="train one silo alone under the federation protocol")
    training_flags(local)
    local.add_argument("--site", required=True, choices=SOURCE_IDS)

    fed = sub.add_parser("federate", help="run federated training over the prepared silos")
    training_flags(fed)
    fed.add_argument("--aggregation", choices=AGGREGATIONS)
    fed.add_argument("--sites", help="comma-separated subset of silos")
    fed.add_argument("--transport", choices=("memory", "loopback"), default="memory")

    report = sub.add_parser("report", help="evaluate the experiment matrix on the held-out split")
    _common(report, suppress=True)
    report.add_argument("--classifiers", default=",".join(CLASSIFIER_KINDS), help="comma-separated kinds")
    report.add_argument("--n-rounds", type=int)
    report.add_argument("--local-epochs", type=int)
    report.add_argument("--echo-paper-table", action="store_true", help="render the published table only")
    return parser


def resolve_config(args) -> RunConfig:
    """Config file values overlaid by explicit flags."""
    obj = {}
    if args.config:
        path = Path(args.config)
        if not path.is_file():
            raise UsageError(f"config file not found: {path}")
        try:
            obj = json.loads(path.read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise UsageError(f"{path}: invalid JSON: {exc}") from None
        if not isinstance(obj, dict):
            raise UsageError(f"{path}: config must be a JSON object")
    try:
        cfg = RunConfig.from_dict(obj)
    except (TypeError, ValueError) as exc:
        raise UsageError(str(exc)) from None
    overrides = {
        "seed": "seed",
        "out_dir": "out_dir",
        "missing_policy": "missing_policy",
        "feature_mode": "feature_mode",
        "classifier": "classifier_kind",
        "aggregation": "aggregation",
        "n_rounds": "n_rounds",
        "local_epochs": "local_epochs",
    }
    for flag, key in overrides.items():
        value = getattr(args, flag, None)
        if value is not None:
            setattr(cfg, key, value)
    if getattr(args, "classifier", None) and cfg.classifier_kind != "svc" and not getattr(args, "aggregation", None):
        cfg.aggregation = "meta-vote"
    sources = dict(cfg.sources)
    if getattr(args, "data_dir", None):
        sources.update({k: str(v) for k, v in default_paths(args.data_dir).items()})
    for spec in getattr(args, "source", None) or []:
        sid, sep, path = spec.partition("=")
        if not sep or sid not in SOURCE_IDS:
            raise UsageError(f"--source expects ID=PATH with ID in {SOURCE_IDS}, got {spec!r}")
        sources[sid] = path
    cfg.sources = sources
    try:
        cfg.validate()
    except ValueError as exc:
        raise UsageError(f"invalid configuration: {exc}") from None
    return cfg


def _emit(text: str) -> None:
    sys.stdout.write(text)
    sys.stdout.flush()


def _write(path: Path, data) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    if isinstance(data, str):
        data = data.encode("utf-8")
    path.write_bytes(data)


# ---- ingest


def cmd_ingest(cfg: RunConfig, fmt: str) -> int:
    if not cfg.sources:
        raise UsageError("no sources given; use --data-dir, --source or the config 'sources' key")
    for path in cfg.sources.values():
        if not Path(path).is_file():
            raise UsageError(f"source file not found: {path}")
    raw = {}
    for sid, path in cfg.sources.items():
        try:
            raw[sid] = load_source(path, sid)
        except (CellError, SchemaError) as exc:
            raise UsageError(f"{path}: {exc}") from None
    prepared = prepare_silos(raw, cfg.missing_policy, cfg.feature_mode)
    out = Path(cfg.out_dir)
    schema = prepared.silos[0].schema
    _write(out / PREPARED / SCHEMA_FILE, dumps_canonical(schema_to_json(schema)) + "\n")
    for d in prepared.silos:
        _write(out / PREPARED / f"{d.source_id}.csv", to_csv(d))
    _write(out / ENCODING_FILE, dumps_canonical(prepared.encoding.to_json()) + "\n")
    split = _split_indices(prepared.silos, cfg.test_fraction)
    _write(out / SPLIT_FILE, dumps_canonical(split) + "\n")
    quality = prepared.report.to_json()
    _write(out / QUALITY_FILE, dumps_canonical(quality) + "\n")
    if fmt == "json":
        _emit(dumps_canonical(quality) + "\n")
    else:
        lines = ["source            read  duplicates  cross-source  dropped-missing  kept"]
        for sid in quality["rows_read"]:
            lines.append(
                f"{sid:<16} {quality['rows_read'][sid]:>5} {quality['duplicates_removed'][sid]:>11}"
                f" {quality['cross_source_duplicates'][sid]:>13} {quality['rows_dropped_missing'][sid]:>16}"
                f" {quality['rows_kept'][sid]:>5}"
            )
        _emit("\n".join(lines) + "\n")
    return EXIT_OK


def _split_indices(silos, test_fraction):
    union = concat(silos)
    _, test_idx = stratified_split_indices(union.labels(), test_fraction, SPLIT_SEED)
    per_silo = {}
    start = 0
    for d in silos:
        local = [int(i) - start for i in test_idx if start <= i < start + len(d)]
        per_silo[d.source_id] = local
        start += len(d)
    return {"seed": SPLIT_SEED, "test_fraction": test_fraction, "test_indices": per_silo}


# ---- prepared artifacts


def load_prepared(cfg: RunConfig):
    """Prepared silos in SOURCE_IDS order plus the stored split."""
    out = Path(cfg.out_dir)
    schema_path = out / PREPARED / SCHEMA_FILE
    split_path = out / SPLIT_FILE
    for p in (schema_path, split_path):
        if not p.is_file():
            raise MissingArtifact(f"missing artifact {p}; run 'svcfl ingest' first")
    schema = schema_from_json(json.loads(schema_path.read_text(encoding="utf-8")))
    silos = []
    for sid in SOURCE_IDS:
        p = out / PREPARED / f"{sid}.csv"
        if p.is_file():
            silos.append(parse_csv(p.read_text(encoding="utf-8"), schema, sid))
    if not silos:
        raise MissingArtifact(f"no prepared silos under {out / PREPARED}")
    split = json.loads(split_path.read_text(encoding="utf-8"))
    return silos, split


def training_portions(silos, split) -> list:
    out = []
    for d in silos:
        test = set(split["test_indices"].get(d.source_id, []))
        out.append(d.select([i for i in range(len(d)) if i not in test]))
    return out


def _train_config(cfg: RunConfig) -> TrainConfig:
    return TrainConfig(classifier_kind=cfg.classifier_kind, seed=cfg.seed)


# ---- train-local


def local_model(silo, cfg: RunConfig) -> GlobalModel:
    """The model one silo reaches alone under the federation protocol.

    Uses the same local 80/20 split, standardization, epoch budget and
    checkpoint selection as a one-client federation, so a single-silo
    ``federate`` run writes the same bytes.
    """
    state = ClientState(silo.source_id, silo, None, cfg.seed)
    Xtr, ytr, _, _ = state.split
    tcfg = _train_config(cfg)
    if cfg.classifier_kind == "svc" and cfg.aggregation == "fedavg":
        model = svc_train(
            (Xtr, ytr),
            tcfg,
            epochs=cfg.n_rounds * cfg.local_epochs,
            checkpoint_every=max(cfg.local_epochs, 1),
        )
        return GlobalModel(averaged=model)
    if cfg.classifier_kind == "svc":
        model = svc_train((Xtr, ytr), tcfg)
    else:
        model = train_model(cfg.classifier_kind, (Xtr, ytr), tcfg)
    return GlobalModel(members=(EnsembleMember(silo.source_id, model, 1.0),))


def cmd_train_local(cfg: RunConfig, site: str, fmt: str) -> int:
    silos, split = load_prepared(cfg)
    by_id = {d.source_id: d for d in training_portions(silos, split)}
    if site not in by_id:
        raise MissingArtifact(f"no prepared silo for {site}")
    try:
        model = local_model(by_id[site], cfg)
    except SvcflError as exc:
        raise TrainingError(str(exc), client_id=site) from exc
    path = Path(cfg.out_dir) / f"local-{site}.json"
    _write(path, dumps_global(model))
    _emit(dumps_canonical({"model": str(path), "site": site}) + "\n" if fmt == "json" else f"wrote {path}\n")
    return EXIT_OK


# ---- federate


def cmd_federate(cfg: RunConfig, fmt: str, sites=None, transport="memory") -> int:
    silos, split = load_prepared(cfg)
    train = training_portions(silos, split)
    if sites:
        wanted = [s.strip() for s in sites.split(",") if s.strip()]
        unknown = set(wanted) - {d.source_id for d in train}
        if unknown:
            raise UsageError(f"unknown or unprepared sites: {sorted(unknown)}")
        train = [d for d in train if d.source_id in wanted]
    rcfg = RoundConfig(
        classifier_kind=cfg.classifier_kind,
        aggregation=cfg.aggregation,
        n_rounds=cfg.n_rounds,
        local_epochs_per_round=cfg.local_epochs,
        seed=cfg.seed,
    )
    result = federate(train, rcfg, transport=transport)
    out = Path(cfg.out_dir)
    _write(out / MODEL_FILE, dumps_global(result.model))
    _write(out / ROUND_LOG_FILE, dumps_round_log(result.round_log))
    if fmt == "json":
        _emit(dumps_canonical({"model": str(out / MODEL_FILE), "round_log": str(out / ROUND_LOG_FILE)}) + "\n")
    else:
        _emit(f"wrote {out / MODEL_FILE}\nwrote {out / ROUND_LOG_FILE}\n")
    return EXIT_OK


# ---- report


def cmd_report(cfg: RunConfig, fmt: str, classifiers: str, echo_published: bool) -> int:
    if echo_published:
        reports = published_reports()
        _emit(render_json(reports).decode("utf-8") if fmt == "json" else render_table(reports))
        return EXIT_OK
    silos, split = load_prepared(cfg)
    model_path = Path(cfg.out_dir) / MODEL_FILE
    if not model_path.is_file():
        raise MissingArtifact(f"missing artifact {model_path}; run 'svcfl federate' first")
    stored = global_from_json(json.loads(model_path.read_text(encoding="utf-8")))
    kinds = [k.strip() for k in classifiers.split(",") if k.strip()]
    bad = set(kinds) - set(CLASSIFIER_KINDS)
    if bad:
        raise UsageError(f"unknown classifiers: {sorted(bad)}")
    cells = default_cells(kinds)
    opts = ExperimentOptions(
        test_fraction=cfg.test_fraction,
        split_seed=SPLIT_SEED,
        seed=cfg.seed,
        n_rounds=cfg.n_rounds,
        local_epochs=cfg.local_epochs,
    )
    stored_cell = Cell(_stored_kind(stored), "fedavg" if stored.averaged is not None else "meta-vote")
    reports = run_experiment_matrix(silos, cells, opts, models={stored_cell: stored})
    _write(Path(cfg.out_dir) / REPORT_FILE, render_json(reports))
    _emit(render_json(reports).decode("utf-8") if fmt == "json" else render_table(reports))
    return EXIT_OK


def _stored_kind(model: GlobalModel) -> str:
    return "svc" if model.averaged is not None else model_kind(model.members[0].model)


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    fmt = args.format or "table"
    try:
        cfg = resolve_config(args)
        if args.command == "ingest":
            return cmd_ingest(cfg, fmt)
        if args.command == "train-local":
            return cmd_train_local(cfg, args.site, fmt)
        if args.command == "federate":
            return cmd_federate(cfg, fmt, args.sites, args.transport)
        return cmd_report(cfg, fmt, args.classifiers, args.echo_paper_table)
    except UsageError as exc:
        print(f"svcfl: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except MissingArtifact as exc:
        print(f"svcfl: error: {exc}", file=sys.stderr)
        return EXIT_MISSING
    except CellFailure as exc:
        print(f"svcfl: error: {exc}", file=sys.stderr)
        return EXIT_TRAINING
    except SvcflError as exc:
        print(f"svcfl: training failed: {exc}", file=sys.stderr)
        return EXIT_TRAINING


if __name__ == "__main__":
    sys.exit(main())

