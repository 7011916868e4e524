"""Horizontal federation: clients train locally, a coordinator aggregates.

Every coordinator/client exchange goes through the wire codec, either as
in-memory byte strings or as length-prefixed frames over socket pairs.
"""

from __future__ import annotations

import json
import math
import socket
import threading
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from ..classifiers.params import predict_many, train_model
from ..classifiers.svc import (
    LinearSvcModel,
    hinge_sum,
    objective_from_hinge,
    standardization_from_stats,
    sufficient_stats,
    svc_train,
)
from ..config import RoundConfig
from ..dataset.prepare import stratified_split_indices
from ..dataset.schema import Dataset
from ..errors import FederationSchemaError, StratificationError, SvcflError, TrainingError
from .aggregate import GlobalModel, fedavg, global_to_json, meta_aggregate
from .protocol import Broadcast, ClientUpdate, Message, Registration, decode_message, encode_message
from .transport import SocketChannel, frame, read_frame

LOCAL_VALIDATION_FRACTION = 0.2


@dataclass
class ClientState:
    client_id: str
    local_data: Dataset
    current_global: object = None
    rng_seed: int = 0

    def __post_init__(self):
        if len(self.local_data) == 0:
            raise FederationSchemaError(f"client {self.client_id} holds no data")

    @cached_property
    def split(self):
        """Deterministic 80/20 (train, validation) split of the local data."""
        X, y = self.local_data.to_arrays()
        try:
            tr, va = stratified_split_indices(y, LOCAL_VALIDATION_FRACTION, self.rng_seed)
        except StratificationError:
            perm = np.random.default_rng(self.rng_seed).permutation(len(y))
            k = int(round(LOCAL_VALIDATION_FRACTION * len(y)))
            va, tr = np.sort(perm[:k]), np.sort(perm[k:])
        if len(tr) == 0:
            tr, va = va, tr
        return X[tr], y[tr], X[va], y[va]

    def registration(self) -> Registration:
        Xtr = self.split[0]
        count, s, sq = sufficient_stats(Xtr)
        return Registration(self.client_id, len(Xtr), Xtr.shape[1], count, tuple(s.tolist()), tuple(sq.tolist()))


def compute_global_standardization(registrations) -> tuple[np.ndarray, np.ndarray]:
    """Pooled per-feature mean and scale from client sufficient statistics."""
    registrations = list(registrations)
    if not registrations:
        raise FederationSchemaError("no clients registered")
    arity = {r.n_features for r in registrations}
    if len(arity) != 1:
        raise FederationSchemaError(f"clients disagree on feature arity: {sorted(arity)}")
    stats = [(r.count, np.asarray(r.sum), np.asarray(r.sum_sq)) for r in registrations]
    return standardization_from_stats(stats)


def _zero_model(bc: Broadcast, c: float) -> LinearSvcModel:
    d = len(bc.means)
    return LinearSvcModel.from_arrays(np.zeros(d), 0.0, c, bc.means, bc.scales)


def _accuracy(model, X, y) -> float:
    if len(y) == 0:
        return 0.0
    return float(np.mean(predict_many(model, X) == y))


def local_train_step(client: ClientState, bc: Broadcast, cfg: RoundConfig) -> ClientUpdate:
    """One client's work for a round.

    fedavg: warm-start at the broadcast parameters (zeros when absent) and
    run ``bc.epochs`` SVC epochs against the federation-wide objective.
    meta-vote: train the configured classifier to completion on local data.
    """
    Xtr, ytr, Xva, yva = client.split
    tcfg = cfg.train_config()
    tcfg = type(tcfg)(tcfg.classifier_kind, tcfg.svc, tcfg.dt, tcfg.rf, client.rng_seed)
    global_hinge = None
    try:
        if cfg.aggregation == "fedavg":
            start = bc.params if bc.params is not None else _zero_model(bc, tcfg.svc.c)
            global_hinge = hinge_sum(start, (Xtr, ytr))
            if bc.epochs == 0:
                params = start
            else:
                params = svc_train(
                    (Xtr, ytr),
                    tcfg,
                    standardization=(bc.means, bc.scales),
                    init=bc.params,
                    n_total=bc.n_total,
                    start_epoch=bc.start_epoch,
                    epochs=bc.epochs,
                    select_best=False,
                )
        elif cfg.classifier_kind == "svc":
            params = svc_train((Xtr, ytr), tcfg, standardization=(bc.means, bc.scales))
        else:
            params = train_model(cfg.classifier_kind, (Xtr, ytr), tcfg)
    except SvcflError as exc:
        raise TrainingError(str(exc), client_id=client.client_id) from exc
    client.current_global = bc.params
    acc = _accuracy(params, Xva, yva) if len(yva) else _accuracy(params, Xtr, ytr)
    return ClientUpdate(client.client_id, params, len(ytr), acc, global_hinge)


class ClientNode:
    """Client side of the protocol: bytes in, bytes out."""

    def __init__(self, state: ClientState, cfg: RoundConfig):
        self.state = state
        self.cfg = cfg
        self.final = None

    def register(self) -> bytes:
        return encode_message(Message("register", 0, self.state.registration()))

    def handle(self, raw: bytes) -> bytes | None:
        msg = decode_message(raw)
        if msg.msg_type == "broadcast":
            update = local_train_step(self.state, msg.payload, self.cfg)
            return encode_message(Message("update", msg.round_index, update))
        if msg.msg_type == "complete":
            self.final = msg.payload
            return None
        raise TrainingError(f"unexpected {msg.msg_type} message", client_id=self.state.client_id)


def serve_client(node: ClientNode, channel: SocketChannel) -> None:
    """Client loop for the socket transport: register, then answer broadcasts."""
    channel.sock.sendall(frame(node.register()))
    while True:
        data = read_frame(channel._file.read)
        if data is None:
            return
        reply = node.handle(data)
        if reply is None:
            return
        channel.sock.sendall(frame(reply))


class _MemoryLinks:
    def __init__(self, nodes, max_workers):
        self.nodes = nodes
        self.pool = ThreadPoolExecutor(max_workers=max(1, max_workers))

    def register(self):
        return [n.register() for n in self.nodes]

    def exchange(self, raws):
        return list(self.pool.map(lambda pair: pair[0].handle(pair[1]), zip(self.nodes, raws)))

    def finish(self, raw):
        for n in self.nodes:
            n.handle(raw)

    def close(self):
        self.pool.shutdown()


class _SocketLinks:
    def __init__(self, nodes):
        self.channels = []
        self.threads = []
        self.errors = []
        for node in nodes:
            server_sock, client_sock = socket.socketpair()
            self.channels.append(SocketChannel(server_sock))
            t = threading.Thread(target=self._run, args=(node, SocketChannel(client_sock)), daemon=True)
            t.start()
            self.threads.append(t)

    def _run(self, node, channel):
        try:
            serve_client(node, channel)
        except Exception as exc:  # surfaced by the coordinator
            self.errors.append(exc)
        finally:
            channel.close()

    def _read_all(self):
        out = []
        for ch in self.channels:
            data = read_frame(ch._file.read)
            if data is None:
                raise self.errors[0] if self.errors else TrainingError("client hung up")
            out.append(data)
        return out

    def register(self):
        return self._read_all()

    def exchange(self, raws):
        for ch, raw in zip(self.channels, raws):
            ch.sock.sendall(frame(raw))
        return self._read_all()

    def finish(self, raw):
        for ch in self.channels:
            ch.sock.sendall(frame(raw))

    def close(self):
        for t in self.threads:
            t.join(timeout=10)
        for ch in self.channels:
            ch.close()


@dataclass
class FederationResult:
    model: GlobalModel
    round_log: list = field(default_factory=list)
    # fedavg only: global parameters after each round (index 0 is the zero start)
    history: list = field(default_factory=list)


def run_federation(datasets, cfg: RoundConfig, *, transport: str = "memory", select_best: bool = True):
    """Run all rounds; returns ``(GlobalModel, round_log)``.

    Use :func:`federate` for the full result including the fedavg history.
    """
    result = federate(datasets, cfg, transport=transport, select_best=select_best)
    return result.model, result.round_log


def federate(datasets, cfg: RoundConfig, *, transport: str = "memory", select_best: bool = True) -> FederationResult:
    datasets = list(datasets)
    if not datasets:
        raise FederationSchemaError("at least one client is required")
    schema = datasets[0].schema
    for d in datasets:
        if d.schema != schema:
            raise FederationSchemaError(f"client {d.source_id} has a different schema")
    ids = [d.source_id for d in datasets]
    if len(set(ids)) != len(ids):
        raise FederationSchemaError(f"duplicate client ids: {ids}")
    states = sorted((ClientState(d.source_id, d, None, cfg.seed) for d in datasets), key=lambda s: s.client_id)
    nodes = [ClientNode(s, cfg) for s in states]
    if transport == "memory":
        links = _MemoryLinks(nodes, cfg.max_workers)
    elif transport == "loopback":
        links = _SocketLinks(nodes)
    else:
        raise ValueError(f"unknown transport {transport!r}")
    try:
        return _coordinate(links, cfg, select_best)
    finally:
        links.close()


def _collect(raws, round_index):
    updates = []
    for raw in raws:
        msg = decode_message(raw)
        if msg.msg_type != "update" or msg.round_index != round_index:
            raise TrainingError(f"expected an update for round {round_index}, got {msg.msg_type}")
        updates.append(msg.payload)
    return sorted(updates, key=lambda u: u.client_id)


def _round_entry(round_index, updates, aggregation, objective):
    return {
        "round": round_index,
        "aggregation": aggregation,
        "clients": [
            {
                "client_id": u.client_id,
                "n_samples": u.n_samples,
                "validation_accuracy": u.local_validation_accuracy,
            }
            for u in updates
        ],
        "global_objective": objective,
    }


def _coordinate(links, cfg: RoundConfig, select_best: bool) -> FederationResult:
    regs = [decode_message(raw).payload for raw in links.register()]
    means, scales = compute_global_standardization(regs)
    means, scales = tuple(means.tolist()), tuple(scales.tolist())
    n_total = sum(r.n_samples for r in regs)
    c = cfg.train_config().svc.c

    def broadcast(params, start_epoch, epochs, round_index):
        bc = Broadcast(cfg.classifier_kind, params, means, scales, n_total, start_epoch, epochs)
        raw = encode_message(Message("broadcast", round_index, bc))
        return _collect(links.exchange([raw] * len(regs)), round_index)

    log = []
    history = []
    if cfg.aggregation == "meta-vote":
        updates = broadcast(None, 0, 0, 0)
        model = meta_aggregate(updates, cfg.vote_weighting)
        log.append(_round_entry(0, updates, cfg.aggregation, None))
    else:
        e = cfg.local_epochs_per_round
        zero = LinearSvcModel.from_arrays(np.zeros(len(means)), 0.0, c, means, scales)
        current = None
        history.append(zero)
        objectives = []
        round_updates = []
        for r in range(cfg.n_rounds):
            updates = broadcast(current, r * e, e, r)
            objectives.append(_global_objective(current or zero, updates, c))
            round_updates.append(updates)
            current = fedavg(updates)
            history.append(current)
        final_updates = broadcast(current, cfg.n_rounds * e, 0, cfg.n_rounds)
        objectives.append(_global_objective(current, final_updates, c))
        for r, updates in enumerate(round_updates):
            log.append(_round_entry(r, updates, cfg.aggregation, objectives[r + 1]))
        if select_best:
            best = min(range(len(objectives)), key=lambda k: (objectives[k], k))
        else:
            best = len(history) - 1
        model = GlobalModel(averaged=history[best])

    done = encode_message(Message("complete", len(log), model))
    links.finish(done)
    return FederationResult(model, log, history)


def _global_objective(model: LinearSvcModel, updates, c: float) -> float:
    return objective_from_hinge(model.w(), c, math.fsum(u.global_hinge for u in updates))


def dumps_round_log(log) -> str:
    """JSON-lines, one object per round."""
    return "".join(json.dumps(entry, sort_keys=True, separators=(",", ":")) + "\n" for entry in log)


def dumps_global(model: GlobalModel) -> bytes:
    return json.dumps(global_to_json(model), sort_keys=True, separators=(",", ":"), allow_nan=False).encode()
