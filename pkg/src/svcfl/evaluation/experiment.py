"""Raw-versus-federated experiment matrix on one shared held-out test set."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..classifiers.params import predict_many, train_model
from ..config import CLASSIFIER_KINDS, RoundConfig, TrainConfig
from ..dataset.prepare import stratified_split_indices
from ..dataset.schema import concat
from ..errors import SvcflError
from ..federation.engine import federate
from .metrics import CONDITIONS, MetricsReport, evaluate

RAW_SITES = ("adults-uci", "adults-kaggle")


@dataclass(frozen=True)
class Cell:
    """One coordinate of the matrix; ``site`` is set only for raw-single-site."""

    classifier_kind: str
    condition: str
    site: str = ""

    def __post_init__(self):
        if self.classifier_kind not in CLASSIFIER_KINDS:
            raise ValueError(f"unknown classifier kind {self.classifier_kind!r}")
        if self.condition not in CONDITIONS:
            raise ValueError(f"unknown condition {self.condition!r}")
        if self.condition == "fedavg" and self.classifier_kind != "svc":
            raise ValueError("fedavg is defined for the linear SVC only")
        if (self.condition == "raw-single-site") != bool(self.site):
            raise ValueError("site is required for raw-single-site cells and only for them")

    def __str__(self):
        return "/".join(p for p in (self.classifier_kind, self.condition, self.site) if p)


class CellFailure(SvcflError):
    """A component error raised while evaluating one cell."""

    def __init__(self, cell: Cell, cause: Exception):
        self.cell = cell
        self.cause = cause
        super().__init__(f"cell {cell}: {cause}")


@dataclass(frozen=True)
class ExperimentOptions:
    test_fraction: float = 0.2
    split_seed: int = 42
    seed: int = 42
    n_rounds: int = 10
    local_epochs: int = 20
    train: TrainConfig = field(default_factory=TrainConfig)
    vote_weighting: str = "n_samples"


def default_cells(kinds=CLASSIFIER_KINDS, raw_sites=RAW_SITES) -> list[Cell]:
    cells = []
    for kind in kinds:
        cells.extend(Cell(kind, "raw-single-site", s) for s in raw_sites)
        if kind == "svc":
            cells.append(Cell(kind, "fedavg"))
        cells.append(Cell(kind, "meta-vote"))
        cells.append(Cell(kind, "pooled-diagnostic"))
    return cells


def split_silos(silos, test_fraction: float = 0.2, seed: int = 42):
    """Stratified test set drawn from the union; the rest stays in its silo.

    Returns ``(train_silos, test)`` where the test Dataset has source id
    ``union``.
    """
    silos = list(silos)
    union = concat(silos)
    _, test_idx = stratified_split_indices(union.labels(), test_fraction, seed)
    in_test = np.zeros(len(union), dtype=bool)
    in_test[test_idx] = True
    train_silos = []
    start = 0
    for d in silos:
        mask = in_test[start : start + len(d)]
        train_silos.append(d.select(np.flatnonzero(~mask)))
        start += len(d)
    return train_silos, union.select(test_idx)


def _round_config(kind: str, aggregation: str, opts: ExperimentOptions) -> RoundConfig:
    return RoundConfig(
        classifier_kind=kind,
        aggregation=aggregation,
        n_rounds=opts.n_rounds if aggregation == "fedavg" else 1,
        local_epochs_per_round=opts.local_epochs,
        seed=opts.seed,
        train=opts.train,
        vote_weighting=opts.vote_weighting,
    )


def _train_config(kind: str, opts: ExperimentOptions) -> TrainConfig:
    return TrainConfig(kind, opts.train.svc, opts.train.dt, opts.train.rf, opts.seed)


def fit_cell(cell: Cell, train_silos, opts: ExperimentOptions):
    """The model a cell evaluates: a classifier or a federated GlobalModel."""
    if cell.condition == "raw-single-site":
        by_id = {d.source_id: d for d in train_silos}
        if cell.site not in by_id:
            raise ValueError(f"no silo named {cell.site!r}")
        return train_model(cell.classifier_kind, by_id[cell.site], _train_config(cell.classifier_kind, opts))
    if cell.condition == "pooled-diagnostic":
        return train_model(cell.classifier_kind, concat(train_silos), _train_config(cell.classifier_kind, opts))
    return federate(train_silos, _round_config(cell.classifier_kind, cell.condition, opts)).model


def _predict(model, X):
    if hasattr(model, "predict_many"):
        return model.predict_many(X)
    return predict_many(model, X)


def run_experiment_matrix(
    datasets, configs, options: ExperimentOptions | None = None, models: dict | None = None
) -> list[MetricsReport]:
    """Evaluate every cell in ``configs`` on one stratified union test set.

    ``datasets`` are the encoded silos from ``prepare_silos``. ``models``
    maps a Cell to an already trained model, which is evaluated instead of
    retraining. Reports come back in the order of ``configs``.
    """
    models = models or {}
    configs = list(configs)
    if not configs:
        return []
    opts = options or ExperimentOptions()
    train_silos, test = split_silos(datasets, opts.test_fraction, opts.split_seed)
    X_test, y_test = test.to_arrays()
    reports = []
    for cell in configs:
        try:
            model = models[cell] if cell in models else fit_cell(cell, train_silos, opts)
            pred = _predict(model, X_test)
            reports.append(
                evaluate(pred, y_test, condition=cell.condition, classifier_kind=cell.classifier_kind, site=cell.site)
            )
        except SvcflError as exc:
            raise CellFailure(cell, exc) from exc
    return reports
