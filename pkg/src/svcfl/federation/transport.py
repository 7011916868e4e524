"""Length-prefixed framing of wire messages over byte streams."""

from __future__ import annotations

import struct

from ..errors import ProtocolError
from .protocol import Message, decode_message, encode_message

HEADER = struct.Struct(">I")
MAX_FRAME = 1 << 30


def frame(payload: bytes) -> bytes:
    """4-byte big-endian length followed by the payload bytes."""
    if len(payload) > MAX_FRAME:
        raise ProtocolError("frame too large", 0)
    return HEADER.pack(len(payload)) + payload


def _read_exact(read, n: int, offset: int) -> bytes:
    chunks = []
    got = 0
    while got < n:
        chunk = read(n - got)
        if not chunk:
            raise ProtocolError(f"stream ended after {got} of {n} bytes", offset + got)
        chunks.append(chunk)
        got += len(chunk)
    return b"".join(chunks)


def read_frame(read) -> bytes | None:
    """Read one frame using ``read(n)``; None on a clean end of stream."""
    first = read(HEADER.size)
    if not first:
        return None
    if len(first) < HEADER.size:
        first += _read_exact(read, HEADER.size - len(first), len(first))
    (length,) = HEADER.unpack(first)
    if length > MAX_FRAME:
        raise ProtocolError(f"frame length {length} exceeds limit", 0)
    return _read_exact(read, length, HEADER.size)


def split_frames(data: bytes) -> list[bytes]:
    """All frames in a complete buffer; ProtocolError if it is truncated."""
    out = []
    pos = 0
    while pos < len(data):
        if len(data) - pos < HEADER.size:
            raise ProtocolError("truncated frame header", pos)
        (length,) = HEADER.unpack_from(data, pos)
        start = pos + HEADER.size
        if start + length > len(data):
            raise ProtocolError(f"truncated frame: need {length} bytes, have {len(data) - start}", len(data))
        out.append(data[start : start + length])
        pos = start + length
    return out


class SocketChannel:
    """Framed message channel over a connected stream socket."""

    def __init__(self, sock):
        self.sock = sock
        self._file = sock.makefile("rb")

    def send(self, msg: Message) -> None:
        self.sock.sendall(frame(encode_message(msg)))

    def recv(self) -> Message | None:
        data = read_frame(self._file.read)
        return None if data is None else decode_message(data)

    def close(self) -> None:
        self._file.close()
        self.sock.close()
