"""Bus client node.

A node holds one TCP connection to the broker. publish() is safe from any
thread; subscription callbacks run on the node's reader thread and should
return quickly. When the connection breaks the node reconnects with capped
exponential backoff, re-sends its subscriptions and module registrations,
and counts messages published while disconnected as drops (real-time
telemetry has no retransmission).
"""

from __future__ import annotations

import logging
import socket
import threading
import time
from typing import Callable

from .broker import CONTROL_TOPIC, DEFAULT_PORT
from .framing import DEFAULT_MAX_FRAME, Frame, FrameDecoder, FrameError, encode_frame

log = logging.getLogger("arcsim.bus.node")


class BusError(RuntimeError):
    pass


class RegistrationError(BusError):
    """Module id already registered on the broker."""


class RequestTimeout(BusError):
    pass


class BusNode:
    def __init__(self, name: str = "node", host: str = "127.0.0.1",
                 port: int = DEFAULT_PORT, auto_reconnect: bool = True,
                 max_frame: int = DEFAULT_MAX_FRAME,
                 backoff_s: tuple[float, float] = (0.1, 2.0)):
        self.name = name
        self.host = host
        self.port = port
        self.auto_reconnect = auto_reconnect
        self.max_frame = max_frame
        self.backoff_s = backoff_s
        self.drop_count = 0
        self._sock: socket.socket | None = None
        self._send_lock = threading.Lock()
        self._seq_lock = threading.Lock()
        self._seqs: dict[str, int] = {}
        self._subs: list[tuple[str, Callable[[Frame], None]]] = []
        self._module_ids: list[int] = []
        self._pending: dict[int, tuple[threading.Event, list]] = {}
        self._pending_lock = threading.Lock()
        self._reader: threading.Thread | None = None
        self._reconnecting = False
        self._closed = False

    # Connection management ------------------------------------------------

    def connect(self, timeout: float = 5.0) -> "BusNode":
        sock = socket.create_connection((self.host, self.port), timeout=timeout)
        sock.settimeout(None)
        sock.setsockopt(socket.IPPROTO_TCP, socket.TCP_NODELAY, 1)
        self._sock = sock
        self._reader = threading.Thread(
            target=self._reader_loop, args=(sock,),
            name=f"busnode-{self.name}", daemon=True,
        )
        self._reader.start()
        return self

    def close(self) -> None:
        self._closed = True
        self._teardown_socket()

    def __enter__(self) -> "BusNode":
        return self.connect()

    def __exit__(self, *exc) -> None:
        self.close()

    @property
    def connected(self) -> bool:
        return self._sock is not None

    def _teardown_socket(self) -> None:
        sock, self._sock = self._sock, None
        if sock is not None:
            try:
                sock.shutdown(socket.SHUT_RDWR)
            except OSError:
                pass
            try:
                sock.close()
            except OSError:
                pass

    def _handle_disconnect(self) -> None:
        self._teardown_socket()
        with self._pending_lock:
            for ev, slot in self._pending.values():
                slot.append(BusError("connection lost"))
                ev.set()
            self._pending.clear()
        if self.auto_reconnect and not self._closed and not self._reconnecting:
            self._reconnecting = True
            threading.Thread(
                target=self._reconnect_loop,
                name=f"busnode-{self.name}-reconnect", daemon=True,
            ).start()

    def _reconnect_loop(self) -> None:
        delay = self.backoff_s[0]
        while not self._closed:
            time.sleep(delay)
            try:
                self.connect()
            except OSError:
                delay = min(delay * 2.0, self.backoff_s[1])
                continue
            try:
                for pattern, _ in list(self._subs):
                    self._request("subscribe", {"pattern": pattern})
                for mid in list(self._module_ids):
                    self._request("register_module", {"id": mid})
            except BusError:
                pass
            log.info("node %s reconnected", self.name)
            break
        self._reconnecting = False

    # Publishing -----------------------------------------------------------

    def _next_seq(self, topic: str) -> int:
        with self._seq_lock:
            seq = self._seqs.get(topic, 0)
            self._seqs[topic] = seq + 1
            return seq

    def publish(self, topic: str, type_: str, data: dict,
                stamp: float | None = None) -> int | None:
        """Publish one message; returns its seq, or None when dropped
        because the node is disconnected. stamp defaults to wall time."""
        seq = self._next_seq(topic)
        wire = encode_frame(topic, type_, seq,
                            time.time() if stamp is None else stamp,
                            data, self.max_frame)
        sock = self._sock
        if sock is None:
            self.drop_count += 1
            return None
        try:
            with self._send_lock:
                sock.sendall(wire)
        except OSError:
            self.drop_count += 1
            self._handle_disconnect()
            return None
        return seq

    # Subscribing ------------------------------------------------------------

    def subscribe(self, pattern: str, callback: Callable[[Frame], None]) -> None:
        self._subs.append((pattern, callback))
        self._request("subscribe", {"pattern": pattern})

    def register_module(self, module_id: int, timeout: float = 2.0) -> tuple[str, ...]:
        """Advertise a module's three topics; raises RegistrationError on a
        duplicate id."""
        reply = self._request("register_module", {"id": module_id}, timeout=timeout)
        if reply.type == "error":
            raise RegistrationError(reply.data.get("reason", "registration refused"))
        self._module_ids.append(module_id)
        return tuple(reply.data["topics"])

    def stats(self, timeout: float = 2.0) -> dict:
        return self._request("stats", {}, timeout=timeout).data

    # Request/reply over the control topic -----------------------------------

    def _request(self, op: str, data: dict, timeout: float = 2.0) -> Frame:
        seq = self._next_seq(CONTROL_TOPIC)
        ev = threading.Event()
        slot: list = []
        with self._pending_lock:
            self._pending[seq] = (ev, slot)
        wire = encode_frame(CONTROL_TOPIC, op, seq, time.time(), data, self.max_frame)
        sock = self._sock
        if sock is None:
            raise BusError("not connected")
        try:
            with self._send_lock:
                sock.sendall(wire)
        except OSError as e:
            self._handle_disconnect()
            raise BusError(f"send failed: {e}") from e
        if not ev.wait(timeout):
            with self._pending_lock:
                self._pending.pop(seq, None)
            raise RequestTimeout(f"no reply to {op} within {timeout}s")
        result = slot[0]
        if isinstance(result, Exception):
            raise result
        return result

    # Reader ------------------------------------------------------------------

    def _reader_loop(self, sock: socket.socket) -> None:
        decoder = FrameDecoder(self.max_frame)
        try:
            while True:
                chunk = sock.recv(65536)
                if not chunk:
                    break
                for frame in decoder.feed(chunk):
                    self._dispatch(frame)
        except (OSError, FrameError):
            pass
        if self._sock is sock:
            self._handle_disconnect()

    def _dispatch(self, frame: Frame) -> None:
        if frame.topic == CONTROL_TOPIC:
            req_seq = frame.data.get("req_seq")
            with self._pending_lock:
                entry = self._pending.pop(req_seq, None)
            if entry is not None:
                ev, slot = entry
                slot.append(frame)
                ev.set()
            return
        for pattern, callback in self._subs:
            if _matches(pattern, frame.topic):
                try:
                    callback(frame)
                except Exception:
                    log.exception("subscriber callback failed for %s", frame.topic)


def _matches(pattern: str, topic: str) -> bool:
    from .framing import topic_matches

    return topic_matches(pattern, topic)
