"""Edge agent: the device-side pipeline.

Consumes capture records, filters out non-phone vendors, deduplicates per-MAC
via IE fingerprints, batches per posting interval, and publishes JSON batches
over the transport. Lifecycle: a birth message on connect, an offline last
will delivered by the bus if the agent dies uncleanly.
"""
from __future__ import annotations

import json
import time
from dataclasses import dataclass, field

from .bus import Connection, InMemoryBus, TransportError
from .core import OuiDatabase, ProbeObservation

TOPIC_PREFIX = "probesense/v1"
BACKOFF_BASE_S = 1.0
BACKOFF_CAP_S = 60.0


def data_topic(scanner_id: str) -> str:
    return f"{TOPIC_PREFIX}/{scanner_id}/data"


def log_topic(scanner_id: str) -> str:
    return f"{TOPIC_PREFIX}/{scanner_id}/log"


@dataclass
class AgentConfig:
    scanner_id: str
    posting_interval_s: float = 30.0
    sw_version: str = "0.1.0"
    local_ip: str = "127.0.0.1"
    rssi_floor_dbm: int | None = None

    def __post_init__(self):
        if self.posting_interval_s <= 0:
            raise ValueError("posting_interval_s must be positive")


@dataclass
class BatchEntry:
    mac: str
    randomized: bool
    vendor: str
    first_seen: int
    last_seen: int
    packet_count: int
    rssi_min: int
    rssi_max: int
    ssids: list[str] = field(default_factory=list)
    ie_fingerprint: str = ""
    ie_changed: bool = False

    def to_json(self) -> dict:
        return {
            "mac": self.mac,
            "randomized": self.randomized,
            "vendor": self.vendor,
            "first_seen": self.first_seen,
            "last_seen": self.last_seen,
            "packet_count": self.packet_count,
            "rssi_min": self.rssi_min,
            "rssi_max": self.rssi_max,
            "ssids": self.ssids,
            "ie_fingerprint": self.ie_fingerprint,
            "ie_changed": self.ie_changed,
        }


class EdgeAgent:
    """One agent = one logical actor; callers must serialize ingest/flush."""

    def __init__(self, config: AgentConfig, bus: InMemoryBus, oui_db: OuiDatabase,
                 sleep=time.sleep):
        self.config = config
        self.bus = bus
        self.oui_db = oui_db
        self.conn: Connection | None = None
        self.running = False
        self.status = "stopped"
        self.drops: dict[str, int] = {}
        self._sleep = sleep
        self._entries: dict[str, BatchEntry] = {}
        self._batch_start: int = 0

    # --- lifecycle ---

    def start(self, now_ms: int, max_attempts: int | None = None) -> None:
        will_payload = json.dumps(
            {"type": "offline", "scanner_id": self.config.scanner_id, "ts": now_ms}
        ).encode()
        attempt = 0
        while True:
            try:
                self.conn = self.bus.connect(
                    f"agent-{self.config.scanner_id}",
                    last_will=(log_topic(self.config.scanner_id), will_payload),
                )
                break
            except TransportError:
                attempt += 1
                self.status = f"connecting (attempt {attempt})"
                if max_attempts is not None and attempt >= max_attempts:
                    return
                self._sleep(min(BACKOFF_BASE_S * 2 ** (attempt - 1), BACKOFF_CAP_S))
        birth = {
            "type": "birth",
            "scanner_id": self.config.scanner_id,
            "sw_version": self.config.sw_version,
            "local_ip": self.config.local_ip,
            "ts": now_ms,
        }
        self.conn.publish(log_topic(self.config.scanner_id), json.dumps(birth).encode())
        self._batch_start = now_ms
        self.running = True
        self.status = "running"

    def close(self) -> None:
        """Clean shutdown; the last will is not delivered."""
        if self.conn is not None:
            self.conn.close()
        self.running = False
        self.status = "stopped"

    def kill(self) -> None:
        """Unclean death; the bus delivers the offline last will."""
        if self.conn is not None:
            self.conn.drop_unclean()
        self.running = False
        self.status = "dead"

    # --- pipeline ---

    def ingest(self, obs: ProbeObservation) -> None:
        if not self.running:
            self._drop("not_running")
            return
        randomized = obs.mac.is_randomized()
        if not self.oui_db.is_mobile_vendor(obs.mac):
            self._drop("non_mobile_vendor")
            return
        if self.config.rssi_floor_dbm is not None and obs.rssi_dbm < self.config.rssi_floor_dbm:
            self._drop("below_rssi_floor")
            return

        key = obs.mac.canonical
        fp = obs.ie_fingerprint()
        entry = self._entries.get(key)
        if entry is None:
            self._entries[key] = BatchEntry(
                mac=key,
                randomized=randomized,
                vendor=self.oui_db.vendor_lookup(obs.mac),
                first_seen=obs.captured_at_ms,
                last_seen=obs.captured_at_ms,
                packet_count=1,
                rssi_min=obs.rssi_dbm,
                rssi_max=obs.rssi_dbm,
                ssids=list(obs.ssids),
                ie_fingerprint=fp,
            )
            return
        entry.packet_count += 1
        entry.first_seen = min(entry.first_seen, obs.captured_at_ms)
        entry.last_seen = max(entry.last_seen, obs.captured_at_ms)
        entry.rssi_min = min(entry.rssi_min, obs.rssi_dbm)
        entry.rssi_max = max(entry.rssi_max, obs.rssi_dbm)
        for s in obs.ssids:
            if s not in entry.ssids:
                entry.ssids.append(s)
        if fp != entry.ie_fingerprint:
            # major change: replace the stored fingerprint and flag it
            entry.ie_fingerprint = fp
            entry.ie_changed = True

    def flush(self, now_ms: int) -> dict | None:
        """Publish the current batch (possibly empty, as a heartbeat).

        On publish failure the batch is retained and merged into the next
        flush: at-least-once delivery."""
        if self.conn is None:
            return None
        payload = {
            "scanner_id": self.config.scanner_id,
            "batch_start": self._batch_start,
            "batch_end": now_ms,
            "entries": [e.to_json() for e in sorted(self._entries.values(), key=lambda e: e.mac)],
        }
        try:
            self.conn.publish(data_topic(self.config.scanner_id), json.dumps(payload).encode())
        except TransportError:
            self.status = "retrying_publish"
            return None
        self._entries = {}
        self._batch_start = now_ms
        self.status = "running"
        return payload

    def _drop(self, reason: str) -> None:
        self.drops[reason] = self.drops.get(reason, 0) + 1
