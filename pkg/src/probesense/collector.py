"""Archival service: subscribes to every data topic and appends flattened
batch entries to per-scanner, per-day NDJSON files for later replay and
re-analysis. Malformed payloads are quarantined to a dead-letter file, never
silently dropped.
"""
from __future__ import annotations

import base64
import hashlib
import json
from datetime import datetime, timezone
from pathlib import Path
from typing import Callable

from .agent import TOPIC_PREFIX
from .bus import InMemoryBus

CLOCK_SKEW_ALLOWANCE_MS = 5_000

ENTRY_FIELDS = (
    "mac", "randomized", "vendor", "first_seen", "last_seen",
    "packet_count", "rssi_min", "rssi_max", "ssids", "ie_fingerprint", "ie_changed",
)


def _day_of(ts_ms: int) -> str:
    return datetime.fromtimestamp(ts_ms / 1000, tz=timezone.utc).strftime("%Y-%m-%d")


def archive_path(store_root: str | Path, scanner_id: str, day: str) -> Path:
    return Path(store_root) / scanner_id / f"{day}.ndjson"


class Collector:
    def __init__(self, bus: InMemoryBus, store_root: str | Path,
                 clock: Callable[[], int] | None = None,
                 pseudonymize_salt: str | None = None):
        self.store_root = Path(store_root)
        self.store_root.mkdir(parents=True, exist_ok=True)
        self.clock = clock or (lambda: int(datetime.now(tz=timezone.utc).timestamp() * 1000))
        self.salt = pseudonymize_salt
        self.conn = bus.connect("collector")
        self.conn.subscribe(f"{TOPIC_PREFIX}/#", callback=self._on_message)

    def _on_message(self, topic: str, payload: bytes) -> None:
        if not topic.endswith("/data"):
            return
        received_at = self.clock()
        try:
            batch = json.loads(payload)
            scanner_id = batch["scanner_id"]
            entries = batch["entries"]
            if not isinstance(entries, list):
                raise ValueError("entries must be a list")
        except (ValueError, KeyError, TypeError) as e:
            self._dead_letter(received_at, topic, f"unparseable batch: {e}", payload)
            return
        for entry in entries:
            try:
                record = {"received_at": received_at, "scanner_id": scanner_id}
                for f in ENTRY_FIELDS:
                    record[f] = entry[f]
                if record["last_seen"] > received_at + CLOCK_SKEW_ALLOWANCE_MS:
                    raise ValueError("entry timestamp ahead of collector clock")
            except (KeyError, TypeError, ValueError) as e:
                self._dead_letter(received_at, topic, f"bad entry: {e}", payload)
                continue
            if self.salt is not None:
                record["mac"] = hashlib.sha256(
                    (self.salt + record["mac"]).encode()
                ).hexdigest()[:16]
            self._append(scanner_id, record)

    def _append(self, scanner_id: str, record: dict) -> None:
        path = archive_path(self.store_root, scanner_id, _day_of(record["last_seen"]))
        path.parent.mkdir(parents=True, exist_ok=True)
        line = json.dumps(record, sort_keys=True) + "\n"
        try:
            with path.open("a") as fh:
                fh.write(line)
        except OSError:
            # one retry, then halt loudly: losing archive data silently is worse
            with path.open("a") as fh:
                fh.write(line)

    def _dead_letter(self, received_at: int, topic: str, reason: str, payload: bytes) -> None:
        line = json.dumps({
            "received_at": received_at,
            "topic": topic,
            "reason": reason,
            "payload_base64": base64.b64encode(payload).decode(),
        })
        with (self.store_root / "deadletter.ndjson").open("a") as fh:
            fh.write(line + "\n")

    def close(self) -> None:
        self.conn.close()


def read_range(store_root: str | Path, scanner_id: str,
               from_ms: int, to_ms: int) -> list[dict]:
    """All archived records for one scanner with last_seen in [from_ms, to_ms),
    ordered by last_seen. Missing files mean an empty result, not an error."""
    scanner_dir = Path(store_root) / scanner_id
    if not scanner_dir.is_dir() or to_ms <= from_ms:
        return []
    # clamp to the datetime-representable range so open-ended sentinel bounds work
    max_ts = 253_402_300_799_000  # 9999-12-31T23:59:59Z
    first_day = _day_of(max(0, min(from_ms, max_ts)))
    last_day = _day_of(max(0, min(to_ms, max_ts)))
    records = []
    for path in sorted(scanner_dir.glob("*.ndjson")):
        day = path.stem
        if day < first_day or day > last_day:
            continue
        for line in path.read_text().splitlines():
            record = json.loads(line)
            if from_ms <= record["last_seen"] < to_ms:
                records.append(record)
    records.sort(key=lambda r: (r["last_seen"], r["mac"]))
    return records


def list_scanners(store_root: str | Path) -> list[str]:
    root = Path(store_root)
    if not root.is_dir():
        return []
    return sorted(p.name for p in root.iterdir() if p.is_dir() and p.name != "density")
