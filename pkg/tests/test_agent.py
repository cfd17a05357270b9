import json

import pytest

from probesense.agent import AgentConfig, EdgeAgent, data_topic, log_topic
from probesense.bus import InMemoryBus, TransportError
from probesense.core import MacAddress, OuiDatabase, ProbeObservation

PHONE_OUI = bytes.fromhex("a89ced")
LAPTOP_OUI = bytes.fromhex("102233")
OUI_DB = OuiDatabase(
    entries={PHONE_OUI: "PhoneCo", LAPTOP_OUI: "LaptopCo"},
    mobile_vendors={"PhoneCo"},
)


def obs(mac="A8:9C:ED:00:00:01", ts=1_000_000, rssi=-60, ssids=(),
        ie=b"ie", vendor_ie=b"") -> ProbeObservation:
    return ProbeObservation(
        mac=MacAddress.from_str(mac),
        rssi_dbm=rssi,
        ssids=tuple(ssids),
        ie_bytes=ie,
        vendor_ie_bytes=vendor_ie,
        captured_at_ms=ts,
        scanner_id="scan-1",
    )


def started_agent(bus=None, **cfg_kwargs):
    bus = bus or InMemoryBus()
    agent = EdgeAgent(AgentConfig(scanner_id="scan-1", **cfg_kwargs), bus, OUI_DB)
    agent.start(now_ms=1_000_000)
    return agent, bus


class TestLifecycle:
    def test_birth_message_on_start(self):
        bus = InMemoryBus()
        sub = bus.connect("watcher").subscribe("probesense/v1/#")
        started_agent(bus)
        topics = [(t, json.loads(p)) for t, p in sub.drain()]
        assert topics[0][0] == log_topic("scan-1")
        assert topics[0][1]["type"] == "birth"
        assert topics[0][1]["scanner_id"] == "scan-1"
        assert "sw_version" in topics[0][1] and "local_ip" in topics[0][1]

    def test_unclean_death_emits_offline_will(self):
        bus = InMemoryBus()
        sub = bus.connect("watcher").subscribe("probesense/v1/#")
        agent, _ = started_agent(bus)
        sub.drain()
        agent.kill()
        msgs = [(t, json.loads(p)) for t, p in sub.drain()]
        assert msgs == [(log_topic("scan-1"),
                         {"type": "offline", "scanner_id": "scan-1", "ts": 1_000_000})]

    def test_clean_close_emits_nothing(self):
        bus = InMemoryBus()
        sub = bus.connect("watcher").subscribe("probesense/v1/#")
        agent, _ = started_agent(bus)
        sub.drain()
        agent.close()
        assert sub.drain() == []

    def test_connect_retry_backoff(self):
        class FlakyBus(InMemoryBus):
            def __init__(self, failures):
                super().__init__()
                self.failures = failures

            def connect(self, client_id, last_will=None):
                if self.failures > 0:
                    self.failures -= 1
                    raise TransportError("broker down")
                return super().connect(client_id, last_will)

        sleeps = []
        bus = FlakyBus(failures=3)
        agent = EdgeAgent(AgentConfig(scanner_id="scan-1"), bus, OUI_DB,
                          sleep=sleeps.append)
        agent.start(now_ms=1_000_000)
        assert agent.status == "running"
        assert sleeps == [1.0, 2.0, 4.0]

    def test_bad_posting_interval_rejected(self):
        with pytest.raises(ValueError):
            AgentConfig(scanner_id="s", posting_interval_s=0)


class TestFiltering:
    def test_non_mobile_burned_in_dropped(self):
        agent, _ = started_agent()
        agent.ingest(obs(mac="10:22:33:00:00:01"))
        assert agent._entries == {}
        assert agent.drops == {"non_mobile_vendor": 1}

    def test_randomized_mac_always_retained(self):
        agent, _ = started_agent()
        agent.ingest(obs(mac="DA:A1:19:00:00:01"))
        entry = agent._entries["DA:A1:19:00:00:01"]
        assert entry.randomized is True
        assert entry.vendor == "unknown"

    def test_rssi_floor(self):
        agent, _ = started_agent(rssi_floor_dbm=-70)
        agent.ingest(obs(rssi=-75))
        agent.ingest(obs(rssi=-70))
        assert agent.drops.get("below_rssi_floor") == 1
        assert len(agent._entries) == 1


class TestDedupAndMerge:
    def test_repeat_mac_merges_into_one_entry(self):
        agent, _ = started_agent()
        agent.ingest(obs(ts=1_000_100, rssi=-62, ssids=["home"]))
        agent.ingest(obs(ts=1_000_050, rssi=-55, ssids=["work", "home"]))
        agent.ingest(obs(ts=1_000_200, rssi=-60))
        entry = agent._entries["A8:9C:ED:00:00:01"]
        assert entry.packet_count == 3
        assert (entry.first_seen, entry.last_seen) == (1_000_050, 1_000_200)
        assert (entry.rssi_min, entry.rssi_max) == (-62, -55)
        assert entry.ssids == ["home", "work"]
        assert entry.ie_changed is False

    def test_fingerprint_change_sets_flag(self):
        agent, _ = started_agent()
        agent.ingest(obs(ie=b"config-1"))
        agent.ingest(obs(ie=b"config-2", ts=1_000_500))
        entry = agent._entries["A8:9C:ED:00:00:01"]
        assert entry.ie_changed is True
        assert entry.ie_fingerprint == obs(ie=b"config-2").ie_fingerprint()


class TestFlush:
    def test_batch_shape_and_reset(self):
        bus = InMemoryBus()
        sub = bus.connect("watcher").subscribe(data_topic("scan-1"))
        agent, _ = started_agent(bus)
        agent.ingest(obs())
        payload = agent.flush(now_ms=1_030_000)
        ((topic, raw),) = sub.drain()
        assert topic == data_topic("scan-1")
        assert json.loads(raw) == payload
        assert payload["scanner_id"] == "scan-1"
        assert payload["batch_start"] == 1_000_000
        assert payload["batch_end"] == 1_030_000
        assert len(payload["entries"]) == 1
        assert set(payload["entries"][0]) == {
            "mac", "randomized", "vendor", "first_seen", "last_seen",
            "packet_count", "rssi_min", "rssi_max", "ssids",
            "ie_fingerprint", "ie_changed",
        }
        # next batch starts fresh
        next_payload = agent.flush(now_ms=1_060_000)
        assert next_payload["entries"] == []
        assert next_payload["batch_start"] == 1_030_000

    def test_empty_flush_is_heartbeat(self):
        bus = InMemoryBus()
        sub = bus.connect("watcher").subscribe(data_topic("scan-1"))
        agent, _ = started_agent(bus)
        agent.flush(now_ms=1_030_000)
        ((_, raw),) = sub.drain()
        assert json.loads(raw)["entries"] == []

    def test_failed_publish_retains_and_merges(self):
        bus = InMemoryBus()
        sub = bus.connect("watcher").subscribe(data_topic("scan-1"))
        agent, _ = started_agent(bus)
        agent.ingest(obs(ts=1_000_100))

        real_publish = bus.publish
        def failing_publish(conn, topic, payload):
            raise TransportError("link down")
        bus.publish = failing_publish
        assert agent.flush(now_ms=1_030_000) is None
        assert agent.status == "retrying_publish"

        # observations during the outage still accumulate
        agent.ingest(obs(ts=1_045_000))
        bus.publish = real_publish
        payload = agent.flush(now_ms=1_060_000)
        assert agent.status == "running"
        (entry,) = payload["entries"]
        assert entry["packet_count"] == 2
        assert entry["first_seen"] == 1_000_100
        assert entry["last_seen"] == 1_045_000
        assert len(sub.drain()) == 1

    def test_ingest_before_start_dropped(self):
        agent = EdgeAgent(AgentConfig(scanner_id="scan-1"), InMemoryBus(), OUI_DB)
        agent.ingest(obs())
        assert agent.drops == {"not_running": 1}
