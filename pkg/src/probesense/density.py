"""Real-time crowd density estimation.

Per scanner, a presence table maps device key (canonical MAC) to the last
time it was heard. A periodic sweep evicts keys silent for longer than the
expiry window (strictly greater: a device exactly at the window boundary is
retained) and the leftover count is the density sample, persisted and pushed
to the realtime channel.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

from .agent import TOPIC_PREFIX
from .bus import InMemoryBus

DEFAULT_SWEEP_INTERVAL_S = 60.0
DEFAULT_EXPIRY_WINDOW_S = 240.0


@dataclass
class DensityConfig:
    sweep_interval_s: float = DEFAULT_SWEEP_INTERVAL_S
    expiry_window_s: float = DEFAULT_EXPIRY_WINDOW_S

    def __post_init__(self):
        if not self.expiry_window_s > self.sweep_interval_s > 0:
            raise ValueError("need expiry_window > sweep_interval > 0")


@dataclass(frozen=True)
class DensitySample:
    scanner_id: str
    ts: int
    count: int

    def to_json(self) -> dict:
        return {"scanner_id": self.scanner_id, "ts": self.ts, "count": self.count}


@dataclass
class PresenceTable:
    scanner_id: str
    last_seen: dict[str, int] = field(default_factory=dict)

    def apply_batch(self, batch: dict) -> None:
        if batch["scanner_id"] != self.scanner_id:
            raise ValueError(
                f"batch for {batch['scanner_id']!r} applied to table {self.scanner_id!r}"
            )
        for entry in batch["entries"]:
            mac = entry["mac"]
            ts = entry["last_seen"]
            if ts > self.last_seen.get(mac, -1):
                self.last_seen[mac] = ts

    def sweep(self, now_ms: int, config: DensityConfig) -> DensitySample:
        window_ms = config.expiry_window_s * 1000
        expired = [mac for mac, ts in self.last_seen.items() if now_ms - ts > window_ms]
        for mac in expired:
            del self.last_seen[mac]
        return DensitySample(scanner_id=self.scanner_id, ts=now_ms, count=len(self.last_seen))


class DensityService:
    """Subscribes to all data topics, discovers scanners from topic names, and
    maintains one presence table per scanner. Sweeping is driven externally
    via tick() so simulated and wall-clock time both work."""

    def __init__(self, bus: InMemoryBus, config: DensityConfig, store_root: str | Path,
                 realtime_out: Callable[[DensitySample], None] | None = None):
        self.config = config
        self.store_root = Path(store_root)
        (self.store_root / "density").mkdir(parents=True, exist_ok=True)
        self.realtime_out = realtime_out
        self.tables: dict[str, PresenceTable] = {}
        self.malformed_batches = 0
        self.conn = bus.connect("density-svc")
        self.conn.subscribe(f"{TOPIC_PREFIX}/#", callback=self._on_message)

    def _on_message(self, topic: str, payload: bytes) -> None:
        if not topic.endswith("/data"):
            return
        try:
            batch = json.loads(payload)
            scanner_id = batch["scanner_id"]
            table = self.tables.get(scanner_id)
            if table is None:
                table = self.tables[scanner_id] = PresenceTable(scanner_id)
            table.apply_batch(batch)
        except (ValueError, KeyError, TypeError):
            self.malformed_batches += 1

    def tick(self, now_ms: int) -> list[DensitySample]:
        """Sweep every known scanner, persist and push each sample."""
        samples = []
        for scanner_id in sorted(self.tables):
            sample = self.tables[scanner_id].sweep(now_ms, self.config)
            self._persist(sample)
            if self.realtime_out is not None:
                self.realtime_out(sample)
            samples.append(sample)
        return samples

    def _persist(self, sample: DensitySample) -> None:
        path = self.store_root / "density" / f"{sample.scanner_id}.ndjson"
        with path.open("a") as fh:
            fh.write(json.dumps(sample.to_json(), sort_keys=True) + "\n")

    def close(self) -> None:
        self.conn.close()


def read_density_series(store_root: str | Path, scanner_id: str) -> list[DensitySample]:
    path = Path(store_root) / "density" / f"{scanner_id}.ndjson"
    if not path.is_file():
        return []
    out = []
    for line in path.read_text().splitlines():
        doc = json.loads(line)
        out.append(DensitySample(scanner_id=doc["scanner_id"], ts=doc["ts"], count=doc["count"]))
    return out
