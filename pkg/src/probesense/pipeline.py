"""End-to-end wiring: simulator -> edge agents -> bus -> collector + density.

The whole pipeline runs on simulated time: agent flushes and density sweeps
are scheduled on the scenario clock, so runs are deterministic and fast
regardless of the simulated duration. Also provides the deterministic
archive replay used to recompute density series offline.
"""
from __future__ import annotations

import random
from dataclasses import dataclass, field
from pathlib import Path

from .agent import AgentConfig, EdgeAgent
from .bus import Connection, InMemoryBus, TransportError
from .collector import Collector, list_scanners, read_range
from .core import UNKNOWN_VENDOR, OuiDatabase, ProbeObservation
from .density import DensityConfig, DensitySample, DensityService, PresenceTable, read_density_series
from .journey import DEFAULT_GAP_THRESHOLD_S, FlowMatrix, build_trajectories, flows
from .sim import GroundTruth, Scenario, run_scenario


def permissive_oui_db() -> OuiDatabase:
    """OUI database that treats unknown vendors as phones; filtering behavior
    is opt-in via a real database + allowlist."""
    return OuiDatabase(entries={}, mobile_vendors={UNKNOWN_VENDOR})


@dataclass
class PipelineConfig:
    posting_interval_s: float = 30.0
    density: DensityConfig = field(default_factory=DensityConfig)
    gap_threshold_s: float = DEFAULT_GAP_THRESHOLD_S
    rssi_floor_dbm: int | None = None

    def validate(self) -> None:
        # DensityConfig validates its own invariant on construction
        if self.posting_interval_s <= 0:
            raise ValueError("posting_interval_s must be positive")


class FaultyBus(InMemoryBus):
    """Bus that drops a seeded fraction of data-topic publishes, for
    at-least-once delivery testing."""

    def __init__(self, failure_rate: float, seed: int = 0):
        super().__init__()
        self.failure_rate = failure_rate
        self._rng = random.Random(f"faults/{seed}")
        self.injected_failures = 0

    def publish(self, conn: Connection, topic: str, payload: bytes) -> None:
        if topic.endswith("/data") and self._rng.random() < self.failure_rate:
            self.injected_failures += 1
            raise TransportError("injected publish failure")
        super().publish(conn, topic, payload)


@dataclass
class PipelineResult:
    scenario: Scenario
    observations: list[ProbeObservation]
    truth: GroundTruth
    store_root: Path
    samples: dict[str, list[DensitySample]]
    agents: dict[str, EdgeAgent]
    ingested_packets: dict[str, int]  # canonical MAC -> packets accepted by agents


def run_pipeline(
    scenario: Scenario,
    store_root: str | Path,
    config: PipelineConfig | None = None,
    oui_db: OuiDatabase | None = None,
    bus: InMemoryBus | None = None,
    realtime_out=None,
    drain_sweeps: int = 0,
) -> PipelineResult:
    config = config or PipelineConfig()
    config.validate()
    oui_db = oui_db or permissive_oui_db()
    bus = bus or InMemoryBus()
    store_root = Path(store_root)

    observations, truth = run_scenario(scenario)

    sim_clock = {"now": scenario.start_time_ms}
    collector = Collector(bus, store_root, clock=lambda: sim_clock["now"])
    density = DensityService(bus, config.density, store_root, realtime_out=realtime_out)

    agents: dict[str, EdgeAgent] = {}
    for scanner_id, _zone in scenario.scanners:
        agent = EdgeAgent(
            AgentConfig(
                scanner_id=scanner_id,
                posting_interval_s=config.posting_interval_s,
                rssi_floor_dbm=config.rssi_floor_dbm,
            ),
            bus,
            oui_db,
        )
        agent.start(scenario.start_time_ms)
        agents[scanner_id] = agent

    # schedule: observations, then flushes, then sweeps at equal timestamps,
    # so a sweep at T sees everything published up to and including T
    start = scenario.start_time_ms
    end = start + round(scenario.duration_s * 1000)
    events: list[tuple[int, int, object]] = [
        (obs.captured_at_ms, 0, obs) for obs in observations
    ]
    flush_ms = round(config.posting_interval_s * 1000)
    t = start + flush_ms
    while t < end:
        events.append((t, 1, "flush"))
        t += flush_ms
    events.append((end, 1, "flush"))
    sweep_ms = round(config.density.sweep_interval_s * 1000)
    n_sweeps = int((end - start) // sweep_ms) + drain_sweeps
    for j in range(1, n_sweeps + 1):
        events.append((start + j * sweep_ms, 2, "sweep"))
    events.sort(key=lambda e: (e[0], e[1]))

    ingested_packets: dict[str, int] = {}
    for when, _prio, what in events:
        sim_clock["now"] = when
        if isinstance(what, ProbeObservation):
            agent = agents.get(what.scanner_id)
            if agent is not None:
                before = sum(agent.drops.values())
                agent.ingest(what)
                if sum(agent.drops.values()) == before:
                    mac = what.mac.canonical
                    ingested_packets[mac] = ingested_packets.get(mac, 0) + 1
        elif what == "flush":
            for agent in agents.values():
                agent.flush(when)
        elif what == "sweep":
            density.tick(when)

    # one final flush so batches retained by injected publish failures land
    final_t = max(end, start + (n_sweeps * sweep_ms if events else 0)) + flush_ms
    for agent in agents.values():
        if agent._entries:
            sim_clock["now"] = final_t
            agent.flush(final_t)

    for agent in agents.values():
        agent.close()
    collector.close()
    density.close()

    samples = {
        scanner_id: read_density_series(store_root, scanner_id)
        for scanner_id, _zone in scenario.scanners
    }
    return PipelineResult(
        scenario=scenario,
        observations=observations,
        truth=truth,
        store_root=store_root,
        samples=samples,
        agents=agents,
        ingested_packets=ingested_packets,
    )


def accuracy_report(result: PipelineResult) -> list[dict]:
    """Estimated vs. true occupancy per sweep per scanner."""
    zone_of_scanner = {scanner: zone for scanner, zone in result.scenario.scanners}
    rows = []
    for scanner_id, series in result.samples.items():
        zone = zone_of_scanner[scanner_id]
        for sample in series:
            t_s = (sample.ts - result.scenario.start_time_ms) / 1000.0
            true_count = len(result.truth.occupancy(zone, t_s))
            rows.append({
                "ts": sample.ts,
                "scanner_id": scanner_id,
                "estimated": sample.count,
                "true": true_count,
            })
    rows.sort(key=lambda r: (r["ts"], r["scanner_id"]))
    return rows


def compute_flows(store_root: str | Path, from_ms: int, to_ms: int,
                  gap_threshold_s: float = DEFAULT_GAP_THRESHOLD_S,
                  scanner_ids: list[str] | None = None) -> FlowMatrix:
    """Journey inference over the archive for a time window."""
    if scanner_ids is None:
        scanner_ids = list_scanners(store_root)
    records: list[dict] = []
    for scanner_id in scanner_ids:
        records.extend(read_range(store_root, scanner_id, from_ms, to_ms))
    records.sort(key=lambda r: (r["first_seen"], r["scanner_id"], r["mac"]))
    trajectories = build_trajectories(records, gap_threshold_s)
    return flows(trajectories, (from_ms, to_ms))


def replay_density(store_root: str | Path, config: DensityConfig,
                   start_ms: int, duration_s: float,
                   scanner_ids: list[str] | None = None,
                   drain_sweeps: int = 0) -> dict[str, list[DensitySample]]:
    """Recompute the density sample series from the archive.

    Records are applied in received_at order against the same sweep schedule
    the live service ran, which reproduces the live series bit for bit."""
    if scanner_ids is None:
        scanner_ids = list_scanners(store_root)
    end_ms = start_ms + round(duration_s * 1000)
    records: list[dict] = []
    for scanner_id in scanner_ids:
        records.extend(read_range(store_root, scanner_id, 0, end_ms + 10**12))
    records.sort(key=lambda r: (r["received_at"], r["scanner_id"], r["mac"]))

    # a scanner enters the live service's sweep set at its first heartbeat,
    # one posting interval after start; with default cadences that is before
    # the first sweep, so replay treats scanners as known from the start
    tables = {s: PresenceTable(s) for s in scanner_ids}
    series: dict[str, list[DensitySample]] = {s: [] for s in scanner_ids}
    sweep_ms = round(config.sweep_interval_s * 1000)
    n_sweeps = int((end_ms - start_ms) // sweep_ms) + drain_sweeps
    idx = 0
    for j in range(1, n_sweeps + 1):
        now = start_ms + j * sweep_ms
        while idx < len(records) and records[idx]["received_at"] <= now:
            rec = records[idx]
            table = tables[rec["scanner_id"]]
            if rec["last_seen"] > table.last_seen.get(rec["mac"], -1):
                table.last_seen[rec["mac"]] = rec["last_seen"]
            idx += 1
        for scanner_id in sorted(tables):
            series[scanner_id].append(tables[scanner_id].sweep(now, config))
    return series
