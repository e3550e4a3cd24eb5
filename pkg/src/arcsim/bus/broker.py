"""Central pub/sub broker.

Star topology over TCP: every node connects to the broker, declares
subscriptions, and publishes frames the broker fans out to matching
subscribers. Each connection gets its own reader and writer thread; per
subscriber there is a bounded send queue with drop-oldest overflow so a slow
subscriber can never stall a publisher. Registration of module ids is tied
to the connection and freed on disconnect.
"""

from __future__ import annotations

import logging
import socket
import struct
import threading
from collections import deque

from .framing import (
    DEFAULT_MAX_FRAME,
    HEADER_SIZE,
    Frame,
    FrameError,
    FrameSizeError,
    encode_frame,
    is_valid_topic,
    topic_matches,
)

log = logging.getLogger("arcsim.bus.broker")

CONTROL_TOPIC = "/system/_bus"
DEFAULT_PORT = 7781
DEFAULT_SUBSCRIBER_QUEUE = 4096


class _Client:
    def __init__(self, sock: socket.socket, addr, queue_limit: int):
        self.sock = sock
        self.addr = addr
        self.queue_limit = queue_limit
        self.patterns: list[str] = []
        self.module_ids: set[int] = set()
        self.queue: deque[bytes] = deque()
        self.cond = threading.Condition()
        self.closed = False
        self.drops = 0
        self.reply_seq = 0

    def enqueue(self, wire: bytes) -> None:
        with self.cond:
            if self.closed:
                return
            if len(self.queue) >= self.queue_limit:
                self.queue.popleft()
                self.drops += 1
            self.queue.append(wire)
            self.cond.notify()

    def close(self) -> None:
        with self.cond:
            self.closed = True
            self.cond.notify()
        try:
            self.sock.shutdown(socket.SHUT_RDWR)
        except OSError:
            pass
        try:
            self.sock.close()
        except OSError:
            pass


class Broker:
    def __init__(self, host: str = "127.0.0.1", port: int = DEFAULT_PORT,
                 max_frame: int = DEFAULT_MAX_FRAME,
                 subscriber_queue: int = DEFAULT_SUBSCRIBER_QUEUE):
        self.host = host
        self.port = port
        self.max_frame = max_frame
        self.subscriber_queue = subscriber_queue
        self._server: socket.socket | None = None
        self._clients: list[_Client] = []
        self._registered: dict[int, _Client] = {}
        self._lock = threading.Lock()
        self._accept_thread: threading.Thread | None = None
        self._running = False

    # Lifecycle ----------------------------------------------------------

    def start(self) -> None:
        server = socket.create_server((self.host, self.port))
        # Grab the actual port when 0 was requested.
        self.port = server.getsockname()[1]
        self._server = server
        self._running = True
        self._accept_thread = threading.Thread(
            target=self._accept_loop, name="broker-accept", daemon=True
        )
        self._accept_thread.start()
        log.info("broker listening on %s:%d", self.host, self.port)

    def stop(self) -> None:
        self._running = False
        if self._server is not None:
            # Wake the blocked accept() before closing the listener.
            try:
                socket.create_connection((self.host, self.port), timeout=0.5).close()
            except OSError:
                pass
            try:
                self._server.close()
            except OSError:
                pass
        with self._lock:
            clients = list(self._clients)
        for c in clients:
            c.close()
        if self._accept_thread is not None:
            self._accept_thread.join(timeout=2.0)

    def __enter__(self) -> "Broker":
        self.start()
        return self

    def __exit__(self, *exc) -> None:
        self.stop()

    @property
    def total_drops(self) -> int:
        with self._lock:
            return sum(c.drops for c in self._clients)

    # Internals ----------------------------------------------------------

    def _accept_loop(self) -> None:
        assert self._server is not None
        while self._running:
            try:
                sock, addr = self._server.accept()
            except OSError:
                return
            sock.setsockopt(socket.IPPROTO_TCP, socket.TCP_NODELAY, 1)
            # Bound kernel-side buffering so per-subscriber flow control
            # lives in the drop-oldest queue, not in megabytes of socket
            # buffer.
            sock.setsockopt(socket.SOL_SOCKET, socket.SO_SNDBUF, 65536)
            client = _Client(sock, addr, self.subscriber_queue)
            with self._lock:
                self._clients.append(client)
            threading.Thread(
                target=self._reader_loop, args=(client,),
                name=f"broker-read-{addr}", daemon=True,
            ).start()
            threading.Thread(
                target=self._writer_loop, args=(client,),
                name=f"broker-write-{addr}", daemon=True,
            ).start()
            log.info("client connected: %s", addr)

    def _drop_client(self, client: _Client) -> None:
        with self._lock:
            if client in self._clients:
                self._clients.remove(client)
            for mid in client.module_ids:
                if self._registered.get(mid) is client:
                    del self._registered[mid]
        client.close()
        log.info("client disconnected: %s (drops=%d)", client.addr, client.drops)

    def _reader_loop(self, client: _Client) -> None:
        buf = bytearray()
        sock = client.sock
        try:
            while self._running and not client.closed:
                chunk = sock.recv(65536)
                if not chunk:
                    break
                buf.extend(chunk)
                while True:
                    if len(buf) < HEADER_SIZE:
                        break
                    (length,) = struct.unpack("<I", bytes(buf[:HEADER_SIZE]))
                    if length > self.max_frame:
                        raise FrameSizeError(f"oversize frame from {client.addr}")
                    end = HEADER_SIZE + length
                    if len(buf) < end:
                        break
                    payload = bytes(buf[HEADER_SIZE:end])
                    del buf[:end]
                    self._handle_payload(client, payload)
        except (OSError, FrameError) as e:
            log.warning("reader for %s stopped: %s", client.addr, e)
        finally:
            self._drop_client(client)

    def _writer_loop(self, client: _Client) -> None:
        try:
            while True:
                with client.cond:
                    while not client.queue and not client.closed:
                        client.cond.wait()
                    if client.closed and not client.queue:
                        return
                    batch = bytes(b"".join(client.queue))
                    client.queue.clear()
                client.sock.sendall(batch)
        except OSError:
            self._drop_client(client)

    def _handle_payload(self, client: _Client, payload: bytes) -> None:
        import json

        try:
            obj = json.loads(payload.decode("utf-8"))
            topic = obj["topic"]
        except Exception as e:
            raise FrameError(f"bad payload: {e}") from e
        if topic == CONTROL_TOPIC:
            self._handle_control(client, obj)
            return
        if not is_valid_topic(topic):
            log.warning("dropping frame with invalid topic %r", topic)
            return
        wire = struct.pack("<I", len(payload)) + payload
        with self._lock:
            targets = [
                c for c in self._clients
                if c is not client and any(topic_matches(p, topic) for p in c.patterns)
            ]
        for target in targets:
            target.enqueue(wire)

    def _handle_control(self, client: _Client, obj: dict) -> None:
        op = obj.get("type")
        data = obj.get("data") or {}
        req_seq = obj.get("seq", 0)
        if op == "subscribe":
            pattern = str(data.get("pattern", ""))
            client.patterns = client.patterns + [pattern]
            self._reply(client, req_seq, "ack", {"pattern": pattern})
        elif op == "register_module":
            mid = int(data.get("id", -1))
            with self._lock:
                if mid in self._registered:
                    dup = True
                else:
                    self._registered[mid] = client
                    client.module_ids.add(mid)
                    dup = False
            if dup:
                self._reply(client, req_seq, "error",
                            {"reason": f"module id {mid} already registered"})
            else:
                topics = [f"/module/{mid}/state", f"/module/{mid}/cmd",
                          f"/module/{mid}/imu"]
                self._reply(client, req_seq, "ack", {"topics": topics})
        elif op == "stats":
            with self._lock:
                stats = {
                    "clients": len(self._clients),
                    "drops": sum(c.drops for c in self._clients),
                    "registered": sorted(self._registered),
                }
            self._reply(client, req_seq, "ack", stats)
        else:
            self._reply(client, req_seq, "error", {"reason": f"unknown op {op!r}"})

    def _reply(self, client: _Client, req_seq: int, type_: str, data: dict) -> None:
        import time

        client.reply_seq += 1
        data = dict(data)
        data["req_seq"] = req_seq
        wire = encode_frame(CONTROL_TOPIC, type_, client.reply_seq, time.time(),
                            data, self.max_frame)
        client.enqueue(wire)
