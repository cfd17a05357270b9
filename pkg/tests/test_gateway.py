import json

import pytest
from fastapi.testclient import TestClient
from hypothesis import given, strategies as st

from probesense.agent import log_topic
from probesense.bus import InMemoryBus
from probesense.density import DensitySample, DensityService, DensityConfig
from probesense.gateway.app import create_app
from probesense.gateway.hub import RealtimeHub
from probesense.gateway.store import ConfigStore, Role, role_at_least

T0 = 1_700_000_000_000

TOKENS = {
    "tok-super": ("root", Role.SUPER_ADMIN),
    "tok-admin": ("alice", Role.ADMIN),
    "tok-user": ("bob", Role.USER),
}

SUPER = {"Authorization": "Bearer tok-super"}
ADMIN = {"Authorization": "Bearer tok-admin"}
USER = {"Authorization": "Bearer tok-user"}

PNG_STUB = b"\x89PNG\r\n\x1a\nstub"


@pytest.fixture
def env(tmp_path):
    store = ConfigStore.load(tmp_path / "config.json", TOKENS)
    bus = InMemoryBus()
    hub = RealtimeHub(store)
    app = create_app(store, tmp_path / "data", hub=hub, bus=bus)
    return TestClient(app), store, hub, bus, tmp_path


def make_floor(client, max_density=10):
    entity = client.post("/entities", json={"name": "Acme"}, headers=SUPER).json()
    building = client.post(
        "/buildings", json={"entity_id": entity["id"], "name": "HQ"}, headers=ADMIN
    ).json()
    floor = client.post(
        f"/buildings/{building['id']}/floors",
        data={"name": "G", "max_density": str(max_density)},
        files={"map_image": ("g.png", PNG_STUB, "image/png")},
        headers=ADMIN,
    ).json()
    return entity, building, floor


class TestAuth:
    def test_missing_token_401(self, env):
        client, *_ = env
        r = client.get("/entities")
        assert r.status_code == 401
        assert set(r.json()) == {"code", "message"}

    def test_unknown_token_401(self, env):
        client, *_ = env
        assert client.get("/entities", headers={"Authorization": "Bearer nope"}).status_code == 401

    def test_role_too_low_403(self, env):
        client, *_ = env
        r = client.post("/entities", json={"name": "X"}, headers=ADMIN)
        assert r.status_code == 403
        assert r.json()["code"] == 403

    @given(caller=st.sampled_from(list(Role)), required=st.sampled_from(list(Role)))
    def test_role_lattice(self, caller, required):
        rank = {Role.USER: 0, Role.ADMIN: 1, Role.SUPER_ADMIN: 2}
        assert role_at_least(caller, required) == (rank[caller] >= rank[required])


class TestConfigCrud:
    def test_entity_building_floor_flow(self, env):
        client, store, *_ = env
        entity, building, floor = make_floor(client)
        assert entity["name"] == "Acme"
        assert building["entity_id"] == entity["id"]
        assert floor["max_density"] == 10

        r = client.get(f"/floors/{floor['id']}", headers=USER)
        assert r.json()["name"] == "G"
        r = client.get(f"/floors/{floor['id']}/map", headers=USER)
        assert r.content == PNG_STUB
        assert r.headers["content-type"] == "image/png"

    def test_add_user_and_persistence(self, env, tmp_path):
        client, store, *_ = env
        entity, _, _ = make_floor(client)
        r = client.post(f"/entities/{entity['id']}/users",
                        json={"user_id": "carol", "role": "User"}, headers=ADMIN)
        assert r.json()["users"] == [{"user_id": "carol", "role": "User"}]
        reloaded = ConfigStore.load(tmp_path / "config.json", TOKENS)
        assert reloaded.entities[entity["id"]]["users"][0]["user_id"] == "carol"

    def test_unknown_parent_404(self, env):
        client, *_ = env
        r = client.post("/buildings", json={"entity_id": "ghost", "name": "X"}, headers=ADMIN)
        assert r.status_code == 404

    def test_scanner_placement_lifecycle(self, env):
        client, *_ = env
        _, _, floor = make_floor(client)
        r = client.post(f"/floors/{floor['id']}/scanners",
                        json={"scanner_id": "scan-1", "x": 0.5, "y": 0.25}, headers=ADMIN)
        assert r.status_code == 201
        # same scanner twice -> conflict
        r = client.post(f"/floors/{floor['id']}/scanners",
                        json={"scanner_id": "scan-1", "x": 0.1, "y": 0.1}, headers=ADMIN)
        assert r.status_code == 409
        r = client.get(f"/floors/{floor['id']}/scanners", headers=USER)
        assert [p["scanner_id"] for p in r.json()] == ["scan-1"]
        assert client.delete(f"/floors/{floor['id']}/scanners/scan-1",
                             headers=ADMIN).status_code == 204
        assert client.get(f"/floors/{floor['id']}/scanners", headers=USER).json() == []

    def test_coordinates_validated(self, env):
        client, *_ = env
        _, _, floor = make_floor(client)
        r = client.post(f"/floors/{floor['id']}/scanners",
                        json={"scanner_id": "s", "x": 1.5, "y": 0.0}, headers=ADMIN)
        assert r.status_code == 422

    def test_update_max_density(self, env):
        client, *_ = env
        _, _, floor = make_floor(client)
        r = client.put(f"/floors/{floor['id']}/max_density",
                       json={"max_density": 3}, headers=ADMIN)
        assert r.json()["max_density"] == 3
        r = client.put(f"/floors/{floor['id']}/max_density",
                       json={"max_density": 0}, headers=ADMIN)
        assert r.status_code == 422


class TestDensityHistory:
    def seed_samples(self, tmp_path, scanner="scan-1"):
        bus = InMemoryBus()
        svc = DensityService(bus, DensityConfig(), tmp_path / "data")
        for k, count in enumerate([2, 5, 3, 4]):
            svc._persist(DensitySample(scanner, T0 + k * 60_000, count))

    def test_bucketed_max(self, env, tmp_path):
        client, *_ = env
        _, _, floor = make_floor(client)
        client.post(f"/floors/{floor['id']}/scanners",
                    json={"scanner_id": "scan-1", "x": 0.5, "y": 0.5}, headers=ADMIN)
        self.seed_samples(tmp_path)
        r = client.get(
            f"/floors/{floor['id']}/density",
            params={"from": T0, "to": T0 + 240_000, "bucket": 120},
            headers=USER,
        )
        doc = r.json()
        pts = doc["series"]["scan-1"]
        assert [(p["ts"], p["count"]) for p in pts] == [(T0, 5), (T0 + 120_000, 4)]

    def test_unknown_floor_404(self, env):
        client, *_ = env
        r = client.get("/floors/ghost/density", params={"from": 0, "to": 1}, headers=USER)
        assert r.status_code == 404


class TestRealtime:
    def test_sample_frames_and_breach(self, env):
        client, store, hub, _, _ = env
        _, _, floor = make_floor(client, max_density=5)
        client.post(f"/floors/{floor['id']}/scanners",
                    json={"scanner_id": "scan-1", "x": 0.1, "y": 0.1}, headers=ADMIN)
        client.post(f"/floors/{floor['id']}/scanners",
                    json={"scanner_id": "scan-2", "x": 0.9, "y": 0.9}, headers=ADMIN)
        with client.websocket_connect(f"/realtime/{floor['id']}") as ws:
            hub.publish_sample(DensitySample("scan-1", T0, 3))
            frame = ws.receive_json()
            assert frame == {"type": "sample", "scanner_id": "scan-1", "ts": T0,
                             "count": 3, "floor_total": 3, "breach": False}
            hub.publish_sample(DensitySample("scan-2", T0, 4))
            frame = ws.receive_json()
            assert frame["floor_total"] == 7
            assert frame["breach"] is True

    def test_unknown_floor_closed(self, env):
        client, *_ = env
        with pytest.raises(Exception):
            with client.websocket_connect("/realtime/ghost") as ws:
                ws.receive_json()

    def test_lifecycle_status_frames_from_bus(self, env):
        client, _, _, bus, _ = env
        _, _, floor = make_floor(client)
        client.post(f"/floors/{floor['id']}/scanners",
                    json={"scanner_id": "scan-1", "x": 0.1, "y": 0.1}, headers=ADMIN)
        pub = bus.connect("agent-sim")
        with client.websocket_connect(f"/realtime/{floor['id']}") as ws:
            pub.publish(log_topic("scan-1"), json.dumps(
                {"type": "birth", "scanner_id": "scan-1", "ts": T0}).encode())
            assert ws.receive_json() == {"type": "status", "scanner_id": "scan-1",
                                         "status": "online", "ts": T0}
            pub.publish(log_topic("scan-1"), json.dumps(
                {"type": "offline", "scanner_id": "scan-1", "ts": T0 + 1}).encode())
            assert ws.receive_json()["status"] == "offline"


class TestJourneys:
    def test_sankey_over_archive(self, env, tmp_path):
        client, *_ = env
        _, building, floor = make_floor(client)
        for s in ("scan-A", "scan-B"):
            client.post(f"/floors/{floor['id']}/scanners",
                        json={"scanner_id": s, "x": 0.5, "y": 0.5}, headers=ADMIN)
        day_dir = tmp_path / "data" / "scan-A"
        day_dir.mkdir(parents=True)
        rec = {"received_at": T0, "scanner_id": "scan-A", "mac": "A8:9C:ED:00:00:01",
               "randomized": False, "vendor": "v", "first_seen": T0, "last_seen": T0 + 1000,
               "packet_count": 1, "rssi_min": -60, "rssi_max": -60, "ssids": [],
               "ie_fingerprint": "f" * 32, "ie_changed": False}
        (day_dir / "2023-11-14.ndjson").write_text(json.dumps(rec) + "\n")
        rec2 = dict(rec, scanner_id="scan-B", first_seen=T0 + 60_000, last_seen=T0 + 61_000)
        (tmp_path / "data" / "scan-B").mkdir()
        (tmp_path / "data" / "scan-B" / "2023-11-14.ndjson").write_text(json.dumps(rec2) + "\n")

        r = client.get(f"/buildings/{building['id']}/journeys",
                       params={"from": T0, "to": T0 + 3_600_000}, headers=USER)
        doc = r.json()
        assert doc["nodes"] == [{"id": "scan-A"}, {"id": "scan-B"}]
        assert doc["links"] == [{"source": "scan-A", "target": "scan-B", "value": 1}]
        assert doc["ambiguous_devices"] == 0
