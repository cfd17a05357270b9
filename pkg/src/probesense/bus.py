"""In-process pub/sub bus with MQTT-style semantics.

Topics are `/`-separated; subscription patterns may end in a single `#`
multi-level wildcard. Connections can register a last-will payload that the
bus publishes when the connection dies uncleanly (and only then). The same
contract (connect with will, publish, wildcard subscribe) maps onto an MQTT
3.1.1 broker adapter at QoS 1.
"""
from __future__ import annotations

import threading
from collections import deque
from dataclasses import dataclass, field
from typing import Callable


class TransportError(RuntimeError):
    pass


def topic_matches(pattern: str, topic: str) -> bool:
    p_parts = pattern.split("/")
    t_parts = topic.split("/")
    if p_parts and p_parts[-1] == "#":
        return t_parts[: len(p_parts) - 1] == p_parts[:-1]
    return p_parts == t_parts


@dataclass
class Subscription:
    pattern: str
    callback: Callable[[str, bytes], None] | None = None
    messages: deque = field(default_factory=deque)

    def drain(self) -> list[tuple[str, bytes]]:
        out = []
        while self.messages:
            out.append(self.messages.popleft())
        return out


class Connection:
    def __init__(self, bus: "InMemoryBus", client_id: str,
                 last_will: tuple[str, bytes] | None):
        self.bus = bus
        self.client_id = client_id
        self.last_will = last_will
        self.open = True
        self.subscriptions: list[Subscription] = []

    def publish(self, topic: str, payload: bytes) -> None:
        self.bus.publish(self, topic, payload)

    def subscribe(self, pattern: str, callback: Callable[[str, bytes], None] | None = None) -> Subscription:
        return self.bus.subscribe(self, pattern, callback)

    def close(self) -> None:
        self.bus.close(self)

    def drop_unclean(self) -> None:
        self.bus.drop_unclean(self)


class InMemoryBus:
    """Reliable in-process delivery: every matching subscription sees each
    message exactly once, in per-publisher order."""

    def __init__(self):
        self._lock = threading.RLock()
        self._connections: dict[str, Connection] = {}

    def connect(self, client_id: str, last_will: tuple[str, bytes] | None = None) -> Connection:
        with self._lock:
            old = self._connections.get(client_id)
            if old is not None:
                old.open = False  # superseded session, no will
            conn = Connection(self, client_id, last_will)
            self._connections[client_id] = conn
            return conn

    def publish(self, conn: Connection, topic: str, payload: bytes) -> None:
        if not conn.open:
            raise TransportError(f"connection {conn.client_id!r} is closed")
        self._deliver(topic, payload)

    def _deliver(self, topic: str, payload: bytes) -> None:
        with self._lock:
            targets = [
                sub
                for c in self._connections.values()
                if c.open
                for sub in c.subscriptions
                if topic_matches(sub.pattern, topic)
            ]
        for sub in targets:
            if sub.callback is not None:
                sub.callback(topic, payload)
            else:
                sub.messages.append((topic, payload))

    def subscribe(self, conn: Connection, pattern: str,
                  callback: Callable[[str, bytes], None] | None = None) -> Subscription:
        if not conn.open:
            raise TransportError(f"connection {conn.client_id!r} is closed")
        if not pattern or "#" in pattern.split("/")[:-1]:
            raise TransportError(f"bad subscription pattern: {pattern!r}")
        sub = Subscription(pattern=pattern, callback=callback)
        with self._lock:
            conn.subscriptions.append(sub)
        return sub

    def close(self, conn: Connection) -> None:
        """Clean shutdown: never fires the last will."""
        with self._lock:
            conn.open = False
            if self._connections.get(conn.client_id) is conn:
                del self._connections[conn.client_id]

    def drop_unclean(self, conn: Connection) -> None:
        """Simulate a dead client: the registered last will is published."""
        with self._lock:
            conn.open = False
            if self._connections.get(conn.client_id) is conn:
                del self._connections[conn.client_id]
        if conn.last_will is not None:
            self._deliver(*conn.last_will)
