"""Wire messages exchanged between the coordinator and the clients.

Every message is one canonical JSON envelope

    {"version": 1, "msg_type": ..., "round_index": k, "payload": {...}}

Payload keys are fixed per message type and validated on both encode and
decode, so nothing but aggregate statistics and model parameters can travel
on the wire.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

from ..classifiers.params import from_params, to_params
from ..dataset.csvio import dumps_canonical
from ..errors import ProtocolError

VERSION = 1
MSG_TYPES = ("register", "broadcast", "update", "complete")

PAYLOAD_KEYS = {
    "register": {"client_id", "n_samples", "n_features", "count", "sum", "sum_sq"},
    "broadcast": {"kind", "params", "means", "scales", "n_total", "start_epoch", "epochs"},
    "update": {"client_id", "params", "n_samples", "local_validation_accuracy", "global_hinge"},
    "complete": {"global_model"},
}


@dataclass(frozen=True)
class Registration:
    """A client's sample count and per-feature sufficient statistics."""

    client_id: str
    n_samples: int
    n_features: int
    count: int
    sum: tuple
    sum_sq: tuple


@dataclass(frozen=True)
class Broadcast:
    """Global state sent to every client at the start of a round.

    ``params`` is None before the first fedavg round (clients start at zero)
    and for meta-vote, where clients train from scratch.
    """

    kind: str
    params: object
    means: tuple
    scales: tuple
    n_total: int
    start_epoch: int
    epochs: int


@dataclass(frozen=True)
class ClientUpdate:
    client_id: str
    params: object
    n_samples: int
    local_validation_accuracy: float
    # hinge-loss sum of the received global parameters on local training data
    global_hinge: float | None = None

    def __post_init__(self):
        if self.n_samples < 1:
            raise ValueError("n_samples must be positive")
        if not 0.0 <= self.local_validation_accuracy <= 1.0:
            raise ValueError("local_validation_accuracy must lie in [0, 1]")


@dataclass(frozen=True)
class Message:
    msg_type: str
    round_index: int
    payload: object


def _floats(values):
    return [float(v) for v in values]


def _payload_to_obj(msg_type, payload):
    if msg_type == "register":
        return {
            "client_id": payload.client_id,
            "n_samples": payload.n_samples,
            "n_features": payload.n_features,
            "count": payload.count,
            "sum": _floats(payload.sum),
            "sum_sq": _floats(payload.sum_sq),
        }
    if msg_type == "broadcast":
        return {
            "kind": payload.kind,
            "params": None if payload.params is None else to_params(payload.params),
            "means": _floats(payload.means),
            "scales": _floats(payload.scales),
            "n_total": payload.n_total,
            "start_epoch": payload.start_epoch,
            "epochs": payload.epochs,
        }
    if msg_type == "update":
        return {
            "client_id": payload.client_id,
            "params": to_params(payload.params),
            "n_samples": payload.n_samples,
            "local_validation_accuracy": float(payload.local_validation_accuracy),
            "global_hinge": None if payload.global_hinge is None else float(payload.global_hinge),
        }
    from .aggregate import global_to_json

    return {"global_model": global_to_json(payload)}


def _payload_from_obj(msg_type, obj):
    if msg_type == "register":
        return Registration(
            str(obj["client_id"]),
            int(obj["n_samples"]),
            int(obj["n_features"]),
            int(obj["count"]),
            tuple(float(v) for v in obj["sum"]),
            tuple(float(v) for v in obj["sum_sq"]),
        )
    if msg_type == "broadcast":
        return Broadcast(
            str(obj["kind"]),
            None if obj["params"] is None else from_params(obj["params"]),
            tuple(float(v) for v in obj["means"]),
            tuple(float(v) for v in obj["scales"]),
            int(obj["n_total"]),
            int(obj["start_epoch"]),
            int(obj["epochs"]),
        )
    if msg_type == "update":
        hinge = obj["global_hinge"]
        return ClientUpdate(
            str(obj["client_id"]),
            from_params(obj["params"]),
            int(obj["n_samples"]),
            float(obj["local_validation_accuracy"]),
            None if hinge is None else float(hinge),
        )
    from .aggregate import global_from_json

    return global_from_json(obj["global_model"])


def encode_message(m: Message) -> bytes:
    """Canonical UTF-8 JSON bytes for a message."""
    if m.msg_type not in MSG_TYPES:
        raise ProtocolError(f"unknown msg_type {m.msg_type!r}", 0)
    body = _payload_to_obj(m.msg_type, m.payload)
    if set(body) != PAYLOAD_KEYS[m.msg_type]:
        raise ProtocolError(f"payload keys {sorted(body)} do not match {m.msg_type}", 0)
    envelope = {"version": VERSION, "msg_type": m.msg_type, "round_index": int(m.round_index), "payload": body}
    return dumps_canonical(envelope).encode("utf-8")


def _offset_of(raw: bytes, token: bytes) -> int:
    pos = raw.find(token)
    return max(pos, 0)


def decode_message(raw: bytes) -> Message:
    """Parse and validate envelope bytes; ProtocolError carries a byte offset."""
    try:
        text = raw.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise ProtocolError("invalid UTF-8", exc.start) from None
    try:
        env = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ProtocolError(f"malformed JSON: {exc.msg}", len(text[: exc.pos].encode("utf-8"))) from None
    if not isinstance(env, dict) or set(env) != {"version", "msg_type", "round_index", "payload"}:
        raise ProtocolError("envelope must have exactly version, msg_type, round_index, payload", 0)
    if env["version"] != VERSION:
        raise ProtocolError(f"unsupported version {env['version']!r}", _offset_of(raw, b'"version"'))
    msg_type = env["msg_type"]
    if msg_type not in MSG_TYPES:
        raise ProtocolError(f"unknown msg_type {msg_type!r}", _offset_of(raw, b'"msg_type"'))
    ri = env["round_index"]
    if not isinstance(ri, int) or isinstance(ri, bool) or ri < 0:
        raise ProtocolError("round_index must be a non-negative integer", _offset_of(raw, b'"round_index"'))
    payload = env["payload"]
    where = _offset_of(raw, b'"payload"')
    if not isinstance(payload, dict) or set(payload) != PAYLOAD_KEYS[msg_type]:
        raise ProtocolError(f"payload does not match the {msg_type} schema", where)
    try:
        body = _payload_from_obj(msg_type, payload)
    except (KeyError, TypeError, ValueError) as exc:
        raise ProtocolError(f"invalid {msg_type} payload: {exc}", where) from None
    return Message(msg_type, env["round_index"], body)
