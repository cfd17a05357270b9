#!/usr/bin/env python3
"""Record real gateway responses as JSON fixtures for the dashboard tests.

Spins up the FastAPI app in-process, drives the admin flow and the data
endpoints, and captures every response (status + body) under
frontend/tests/fixtures/gateway/. The dashboard's rendering tests replay
these payloads instead of re-inventing the wire contract by hand.
"""
import json
import sys
import tempfile
from pathlib import Path

from fastapi.testclient import TestClient

from probesense.bus import InMemoryBus
from probesense.density import DensityConfig, DensitySample, DensityService
from probesense.gateway.app import create_app
from probesense.gateway.hub import RealtimeHub
from probesense.gateway.store import ConfigStore, Role

REPO = Path(__file__).resolve().parent.parent
OUT = REPO / "frontend" / "tests" / "fixtures" / "gateway"

T0 = 1_700_000_000_000

TOKENS = {
    "tok-admin": ("alice", Role.ADMIN),
    "tok-user": ("bob", Role.USER),
}
ADMIN = {"Authorization": "Bearer tok-admin"}
USER = {"Authorization": "Bearer tok-user"}

PNG_STUB = b"\x89PNG\r\n\x1a\nfixture"


def save(name: str, status: int, body) -> None:
    OUT.mkdir(parents=True, exist_ok=True)
    (OUT / f"{name}.json").write_text(
        json.dumps({"status": status, "body": body}, indent=2, sort_keys=True) + "\n"
    )
    print(f"recorded {name}.json ({status})")


def seed_density(data_root: Path, scanner_id: str) -> None:
    svc = DensityService(InMemoryBus(), DensityConfig(), data_root)
    for k, count in enumerate([2, 5, 3, 4, 6, 1]):
        svc._persist(DensitySample(scanner_id, T0 + k * 60_000, count))


def seed_archive(data_root: Path) -> None:
    """Seven burned-in devices moving scan-A -> scan-B: Sankey value 7."""
    for n in range(7):
        mac = f"A8:9C:ED:00:00:{n:02X}"
        for scanner, offset in (("scan-A", 0), ("scan-B", 600_000)):
            rec = {
                "received_at": T0 + offset + 30_000,
                "scanner_id": scanner,
                "mac": mac,
                "randomized": False,
                "vendor": "PhoneCo",
                "first_seen": T0 + offset + n * 1000,
                "last_seen": T0 + offset + n * 1000 + 5000,
                "packet_count": 3,
                "rssi_min": -70,
                "rssi_max": -55,
                "ssids": [],
                "ie_fingerprint": "f" * 32,
                "ie_changed": False,
            }
            day_dir = data_root / scanner
            day_dir.mkdir(parents=True, exist_ok=True)
            with (day_dir / "2023-11-14.ndjson").open("a") as fh:
                fh.write(json.dumps(rec, sort_keys=True) + "\n")


def main() -> int:
    with tempfile.TemporaryDirectory() as tmp:
        tmp = Path(tmp)
        store = ConfigStore.load(tmp / "config.json", TOKENS)
        hub = RealtimeHub(store)
        app = create_app(store, tmp / "data", hub=hub)
        client = TestClient(app)

        r = client.post("/entities", json={"name": "Acme Retail"}, headers=ADMIN)
        save("entity_create_forbidden", r.status_code, r.json())  # Admin < SuperAdmin
        store.tokens["tok-admin"] = ("alice", Role.SUPER_ADMIN)
        r = client.post("/entities", json={"name": "Acme Retail"}, headers=ADMIN)
        save("entity_created", r.status_code, r.json())
        entity_id = r.json()["id"]
        store.tokens["tok-admin"] = ("alice", Role.ADMIN)

        r = client.post("/buildings", json={"entity_id": entity_id, "name": "Flagship Store"},
                        headers=ADMIN)
        save("building_created", r.status_code, r.json())
        building_id = r.json()["id"]

        r = client.post(f"/buildings/{building_id}/floors",
                        data={"name": "Ground Floor", "max_density": "25"},
                        files={"map_image": ("ground.png", PNG_STUB, "image/png")},
                        headers=ADMIN)
        save("floor_created", r.status_code, r.json())
        floor_id = r.json()["id"]

        r = client.post(f"/floors/{floor_id}/scanners",
                        json={"scanner_id": "scan-A", "x": 0.25, "y": 0.75}, headers=ADMIN)
        save("placement_created", r.status_code, r.json())
        client.post(f"/floors/{floor_id}/scanners",
                    json={"scanner_id": "scan-B", "x": 0.8, "y": 0.4}, headers=ADMIN)

        r = client.post(f"/floors/{floor_id}/scanners",
                        json={"scanner_id": "scan-A", "x": 0.1, "y": 0.1}, headers=ADMIN)
        save("placement_duplicate_conflict", r.status_code, r.json())

        r = client.post(f"/floors/{floor_id}/scanners",
                        json={"scanner_id": "scan-C", "x": 0.5, "y": 0.5}, headers=USER)
        save("placement_forbidden_for_user", r.status_code, r.json())

        r = client.get(f"/floors/{floor_id}/scanners", headers=USER)
        save("placements_reloaded", r.status_code, r.json())

        r = client.get(f"/floors/{floor_id}", headers=USER)
        save("floor_fetched", r.status_code, r.json())

        seed_density(tmp / "data", "scan-A")
        r = client.get(f"/floors/{floor_id}/density",
                       params={"from": T0, "to": T0 + 360_000, "bucket": 120}, headers=USER)
        save("density_history", r.status_code, r.json())

        r = client.get(f"/floors/{floor_id}/density",
                       params={"from": T0 + 10**9, "to": T0 + 10**9 + 60_000}, headers=USER)
        save("density_history_empty", r.status_code, r.json())

        seed_archive(tmp / "data")
        r = client.get(f"/buildings/{building_id}/journeys",
                       params={"from": T0, "to": T0 + 3_600_000}, headers=USER)
        save("journeys_sankey", r.status_code, r.json())

        # realtime frames as delivered over the websocket
        frames = []
        with client.websocket_connect(f"/realtime/{floor_id}") as ws:
            hub.publish_sample({"scanner_id": "scan-A", "ts": T0, "count": 0})
            hub.publish_sample({"scanner_id": "scan-A", "ts": T0 + 60_000, "count": 5})
            hub.publish_sample({"scanner_id": "scan-B", "ts": T0 + 60_000, "count": 21})
            hub.publish_status("scan-B", "offline", T0 + 90_000)
            for _ in range(4):
                frames.append(ws.receive_json())
        save("realtime_frames", 101, frames)
    return 0


if __name__ == "__main__":
    sys.exit(main())
