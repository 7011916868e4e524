"""Dataclass configurations for training, federation rounds and full runs."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field, fields

CLASSIFIER_KINDS = ("svc", "dt", "rf")
AGGREGATIONS = ("fedavg", "meta-vote")
FEATURE_MODES = ("responses-only", "full")


@dataclass(frozen=True)
class SvcParams:
    c: float = 1.0
    epochs: int = 200
    # test hook: one full-batch subgradient step per epoch instead of per-sample steps
    full_batch: bool = False

    def __post_init__(self):
        if not (self.c > 0 and math.isfinite(self.c)):
            raise ValueError("svc c must be a positive real")
        if self.epochs < 0:
            raise ValueError("svc epochs must be non-negative")


@dataclass(frozen=True)
class TreeParams:
    max_depth: int = 8
    min_samples_leaf: int = 2

    def __post_init__(self):
        if self.max_depth < 0:
            raise ValueError("max_depth must be non-negative")
        if self.min_samples_leaf < 1:
            raise ValueError("min_samples_leaf must be at least 1")


@dataclass(frozen=True)
class ForestParams:
    n_trees: int = 100
    # None means ceil(sqrt(arity)), resolved at training time
    features_per_split: int | None = None
    # test hook: train every tree on the data as given instead of a bootstrap sample
    bootstrap: bool = True

    def __post_init__(self):
        if self.n_trees < 1:
            raise ValueError("n_trees must be at least 1")
        if self.features_per_split is not None and self.features_per_split < 1:
            raise ValueError("features_per_split must be at least 1")

    def resolve_features(self, arity: int) -> int:
        k = self.features_per_split or math.ceil(math.sqrt(arity))
        if not 1 <= k <= arity:
            raise ValueError(f"features_per_split={k} outside [1, {arity}]")
        return k


@dataclass(frozen=True)
class TrainConfig:
    classifier_kind: str = "svc"
    svc: SvcParams = field(default_factory=SvcParams)
    dt: TreeParams = field(default_factory=TreeParams)
    rf: ForestParams = field(default_factory=ForestParams)
    seed: int = 0

    def __post_init__(self):
        if self.classifier_kind not in CLASSIFIER_KINDS:
            raise ValueError(f"unknown classifier kind {self.classifier_kind!r}")


@dataclass(frozen=True)
class RoundConfig:
    classifier_kind: str = "svc"
    aggregation: str = "fedavg"
    n_rounds: int = 10
    local_epochs_per_round: int = 20
    seed: int = 0
    train: TrainConfig | None = None
    # meta-vote member weights: "n_samples" (default) or "validation_accuracy"
    vote_weighting: str = "n_samples"
    max_workers: int = 4

    def __post_init__(self):
        if self.classifier_kind not in CLASSIFIER_KINDS:
            raise ValueError(f"unknown classifier kind {self.classifier_kind!r}")
        if self.aggregation not in AGGREGATIONS:
            raise ValueError(f"unknown aggregation {self.aggregation!r}")
        if self.aggregation == "fedavg" and self.classifier_kind != "svc":
            raise ValueError("fedavg averages linear parameters and needs classifier_kind='svc'")
        if self.n_rounds < 1:
            raise ValueError("n_rounds must be positive")
        if self.local_epochs_per_round < 0:
            raise ValueError("local_epochs_per_round must be non-negative")
        if self.vote_weighting not in ("n_samples", "validation_accuracy"):
            raise ValueError(f"unknown vote weighting {self.vote_weighting!r}")

    def train_config(self) -> TrainConfig:
        base = self.train or TrainConfig()
        return TrainConfig(self.classifier_kind, base.svc, base.dt, base.rf, self.seed)


@dataclass
class RunConfig:
    """Flat run configuration shared by the CLI and the experiment scripts."""

    sources: dict = field(default_factory=dict)
    missing_policy: str = "drop-row"
    feature_mode: str = "full"
    classifier_kind: str = "svc"
    aggregation: str = "fedavg"
    n_rounds: int = 10
    local_epochs: int = 20
    seed: int = 42
    out_dir: str = "out"
    test_fraction: float = 0.2

    def validate(self) -> None:
        if self.missing_policy not in ("drop-row", "mode-impute"):
            raise ValueError(f"unknown missing_policy {self.missing_policy!r}")
        if self.feature_mode not in FEATURE_MODES:
            raise ValueError(f"unknown feature_mode {self.feature_mode!r}")
        if not 0 <= int(self.seed) < 2**64:
            raise ValueError("seed must be a non-negative 64-bit integer")
        RoundConfig(self.classifier_kind, self.aggregation, self.n_rounds, self.local_epochs, self.seed)
        if not 0.0 < self.test_fraction < 1.0:
            raise ValueError("test_fraction must lie in (0, 1)")

    @classmethod
    def from_dict(cls, obj: dict) -> "RunConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(obj) - known
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        return cls(**obj)

    def to_dict(self) -> dict:
        return asdict(self)
