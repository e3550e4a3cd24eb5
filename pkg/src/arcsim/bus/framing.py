"""Wire format of the pub/sub bus.

A frame is a 4-byte little-endian unsigned length prefix followed by exactly
that many bytes of UTF-8 JSON. The JSON object carries the keys topic, type,
seq, stamp, data in that fixed order, which makes encoding byte-deterministic
for identical logical messages.
"""

from __future__ import annotations

import json
import re
import struct
from dataclasses import dataclass
from typing import Iterator

HEADER_SIZE = 4
DEFAULT_MAX_FRAME = 1024 * 1024  # 1 MiB payload cap

_TOPIC_RE = re.compile(r"^/module/\d+/(state|cmd|imu)$|^/system/[A-Za-z0-9_.\-]+$")


class FrameError(ValueError):
    """Malformed frame or payload."""


class FrameSizeError(FrameError):
    """Payload exceeds the frame size cap."""


def is_valid_topic(topic: str) -> bool:
    return bool(_TOPIC_RE.match(topic))


def topic_matches(pattern: str, topic: str) -> bool:
    """Segment-wise match; '*' matches exactly one segment."""
    p_segs = pattern.split("/")
    t_segs = topic.split("/")
    if len(p_segs) != len(t_segs):
        return False
    return all(p == "*" or p == t for p, t in zip(p_segs, t_segs))


@dataclass(frozen=True)
class Frame:
    topic: str
    type: str
    seq: int
    stamp: float
    data: dict


def encode_frame(topic: str, type_: str, seq: int, stamp: float, data: dict,
                 max_frame: int = DEFAULT_MAX_FRAME) -> bytes:
    """Length-prefixed wire bytes for one message."""
    if not is_valid_topic(topic):
        raise FrameError(f"invalid topic {topic!r}")
    payload = json.dumps(
        {"topic": topic, "type": type_, "seq": seq, "stamp": stamp, "data": data},
        separators=(",", ":"),
    ).encode("utf-8")
    if len(payload) > max_frame:
        raise FrameSizeError(
            f"payload is {len(payload)} bytes, cap is {max_frame}"
        )
    return struct.pack("<I", len(payload)) + payload


def decode_frame(buf: bytes, max_frame: int = DEFAULT_MAX_FRAME) -> Frame:
    """Decode one complete frame; the buffer must hold exactly one frame."""
    if len(buf) < HEADER_SIZE:
        raise FrameError("buffer shorter than the length prefix")
    (length,) = struct.unpack("<I", buf[:HEADER_SIZE])
    if length > max_frame:
        raise FrameSizeError(f"declared payload {length} exceeds cap {max_frame}")
    if len(buf) != HEADER_SIZE + length:
        raise FrameError("buffer length disagrees with the prefix")
    return _parse_payload(buf[HEADER_SIZE:])


def _parse_payload(payload: bytes) -> Frame:
    try:
        obj = json.loads(payload.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as e:
        raise FrameError(f"payload is not valid JSON: {e}") from e
    if not isinstance(obj, dict):
        raise FrameError("payload must be a JSON object")
    try:
        return Frame(
            topic=obj["topic"],
            type=obj["type"],
            seq=int(obj["seq"]),
            stamp=float(obj["stamp"]),
            data=obj["data"],
        )
    except (KeyError, TypeError, ValueError) as e:
        raise FrameError(f"payload missing or mistyped field: {e}") from e


class FrameDecoder:
    """Incremental stream decoder; feed() bytes, iterate complete frames."""

    def __init__(self, max_frame: int = DEFAULT_MAX_FRAME):
        self.max_frame = max_frame
        self._buf = bytearray()

    def feed(self, chunk: bytes) -> Iterator[Frame]:
        self._buf.extend(chunk)
        while True:
            if len(self._buf) < HEADER_SIZE:
                return
            (length,) = struct.unpack("<I", self._buf[:HEADER_SIZE])
            if length > self.max_frame:
                raise FrameSizeError(
                    f"declared payload {length} exceeds cap {self.max_frame}"
                )
            end = HEADER_SIZE + length
            if len(self._buf) < end:
                return
            payload = bytes(self._buf[HEADER_SIZE:end])
            del self._buf[:end]
            yield _parse_payload(payload)
