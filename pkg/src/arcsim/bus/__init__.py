from .framing import (
    DEFAULT_MAX_FRAME,
    Frame,
    FrameDecoder,
    FrameError,
    FrameSizeError,
    decode_frame,
    encode_frame,
    is_valid_topic,
    topic_matches,
)
from .broker import Broker, CONTROL_TOPIC, DEFAULT_PORT
from .node import BusError, BusNode, RegistrationError, RequestTimeout

__all__ = [
    "Broker",
    "BusError",
    "BusNode",
    "CONTROL_TOPIC",
    "DEFAULT_MAX_FRAME",
    "DEFAULT_PORT",
    "Frame",
    "FrameDecoder",
    "FrameError",
    "FrameSizeError",
    "RegistrationError",
    "RequestTimeout",
    "decode_frame",
    "encode_frame",
    "is_valid_topic",
    "topic_matches",
]
