"""Horizontal federated learning over the wire codec."""

from .aggregate import EnsembleMember, GlobalModel, fedavg, global_from_json, global_to_json, meta_aggregate, weighted_vote
from .engine import (
    ClientNode,
    ClientState,
    FederationResult,
    compute_global_standardization,
    dumps_global,
    dumps_round_log,
    federate,
    local_train_step,
    run_federation,
)
from .protocol import Broadcast, ClientUpdate, Message, Registration, decode_message, encode_message
from .transport import SocketChannel, frame, read_frame, split_frames
