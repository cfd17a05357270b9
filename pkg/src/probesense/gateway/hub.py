"""Fan-out of realtime density frames to per-floor subscribers.

Density samples arrive from the density service's realtime channel; scanner
birth/offline lifecycle messages arrive from the log topics. Each websocket
client owns a bounded queue; on overflow the oldest frame is dropped.
"""
from __future__ import annotations

import queue
import threading

from .store import ConfigStore

CLIENT_BUFFER = 256


class RealtimeHub:
    def __init__(self, store: ConfigStore):
        self.store = store
        self._lock = threading.Lock()
        self._clients: dict[str, list[queue.Queue]] = {}
        self.latest_counts: dict[str, int] = {}
        self.dropped_frames = 0

    def subscribe(self, floor_id: str) -> queue.Queue:
        q: queue.Queue = queue.Queue(maxsize=CLIENT_BUFFER)
        with self._lock:
            self._clients.setdefault(floor_id, []).append(q)
        return q

    def unsubscribe(self, floor_id: str, q: queue.Queue) -> None:
        with self._lock:
            try:
                self._clients.get(floor_id, []).remove(q)
            except ValueError:
                pass

    def publish_sample(self, sample) -> None:
        """Accepts a DensitySample or its json dict."""
        doc = sample if isinstance(sample, dict) else sample.to_json()
        scanner_id = doc["scanner_id"]
        self.latest_counts[scanner_id] = doc["count"]
        floor_id = self.store.floor_of_scanner(scanner_id)
        if floor_id is None:
            return
        floor = self.store.floors.get(floor_id)
        total = sum(
            self.latest_counts.get(s, 0) for s in self.store.floor_scanners(floor_id)
        )
        frame = {
            "type": "sample",
            "scanner_id": scanner_id,
            "ts": doc["ts"],
            "count": doc["count"],
            "floor_total": total,
            "breach": bool(floor and total > floor["max_density"]),
        }
        self._push(floor_id, frame)

    def publish_status(self, scanner_id: str, status: str, ts: int) -> None:
        floor_id = self.store.floor_of_scanner(scanner_id)
        if floor_id is None:
            return
        self._push(floor_id, {
            "type": "status", "scanner_id": scanner_id, "status": status, "ts": ts,
        })

    def _push(self, floor_id: str, frame: dict) -> None:
        with self._lock:
            clients = list(self._clients.get(floor_id, []))
        for q in clients:
            try:
                q.put_nowait(frame)
            except queue.Full:
                try:
                    q.get_nowait()
                except queue.Empty:
                    pass
                q.put_nowait(frame)
                self.dropped_frames += 1
