"""Deterministic discrete-event simulator of phones probing among scanner zones.

Produces a time-ordered stream of ProbeObservations plus the ground truth
(occupancy and transitions) the estimators are judged against. Identical
seeds give bit-identical output.
"""
from __future__ import annotations

import csv
import random
from dataclasses import dataclass, field
from pathlib import Path
from typing import IO, Iterable

import yaml

from .core import MacAddress, ProbeObservation
from .profiles import (
    BUILTIN_PROFILES,
    DeviceProfile,
    Randomization,
    ScreenState,
    StateParams,
    builtin_profile,
)

DEFAULT_START_MS = 1_700_000_000_000  # arbitrary but fixed epoch anchor
BURST_WINDOW_S = 2.0
RSSI_BASE_DBM = -60
RSSI_JITTER_DBM = 5


class ScenarioError(ValueError):
    """Scenario validation failure; message names the offending field."""


@dataclass
class SimulatedDevice:
    device_id: str
    profile: DeviceProfile
    burned_in_mac: MacAddress
    session_ie: bytes
    screen_schedule: list[tuple[float, ScreenState]] = field(default_factory=list)

    def state_at(self, t_s: float) -> ScreenState:
        state = ScreenState.DISPLAY_OFF
        for at, s in self.screen_schedule:
            if at <= t_s:
                state = s
            else:
                break
        return state


@dataclass
class Scenario:
    seed: int
    scanners: list[tuple[str, str]]  # (scanner_id, zone_id)
    devices: list[SimulatedDevice]
    itinerary: dict[str, list[tuple[str, float, float]]]  # device_id -> (zone, enter_s, exit_s)
    duration_s: float
    power_cycles: dict[str, list[float]] = field(default_factory=dict)
    start_time_ms: int = DEFAULT_START_MS

    def validate(self) -> None:
        if self.duration_s < 0:
            raise ScenarioError("duration_s must be >= 0")
        if self.start_time_ms <= 0:
            raise ScenarioError("start_time_ms must be positive")
        zones_seen = set()
        for scanner_id, zone_id in self.scanners:
            if zone_id in zones_seen:
                raise ScenarioError(f"scanners: zone {zone_id!r} has more than one scanner")
            zones_seen.add(zone_id)
        ids = set()
        for dev in self.devices:
            if dev.device_id in ids:
                raise ScenarioError(f"devices: duplicate device_id {dev.device_id!r}")
            ids.add(dev.device_id)
            if list(dev.screen_schedule) != sorted(dev.screen_schedule, key=lambda e: e[0]):
                raise ScenarioError(f"screen_schedule: not time-ordered for {dev.device_id!r}")
        for device_id, segments in self.itinerary.items():
            if device_id not in ids:
                raise ScenarioError(f"itinerary: unknown device_id {device_id!r}")
            prev_exit = None
            for zone, enter, exit_ in segments:
                if exit_ <= enter:
                    raise ScenarioError(
                        f"itinerary: empty interval for {device_id!r} in zone {zone!r}"
                    )
                if prev_exit is not None and enter < prev_exit:
                    raise ScenarioError(
                        f"itinerary: overlapping/unordered intervals for {device_id!r}"
                    )
                prev_exit = exit_

    @property
    def scanner_by_zone(self) -> dict[str, str]:
        return {zone: scanner for scanner, zone in self.scanners}


@dataclass
class GroundTruth:
    itinerary: dict[str, list[tuple[str, float, float]]]
    transitions: list[tuple[str, str, str, float]]  # (device_id, from_zone, to_zone, t_s)

    @classmethod
    def from_itinerary(cls, itinerary: dict[str, list[tuple[str, float, float]]]) -> "GroundTruth":
        transitions = []
        for device_id, segments in itinerary.items():
            for (z1, _, _), (z2, enter2, _) in zip(segments, segments[1:]):
                transitions.append((device_id, z1, z2, enter2))
        transitions.sort(key=lambda t: (t[3], t[0]))
        return cls(itinerary=itinerary, transitions=transitions)

    def occupancy(self, zone_id: str, t_s: float) -> set[str]:
        out = set()
        for device_id, segments in self.itinerary.items():
            for zone, enter, exit_ in segments:
                if zone == zone_id and enter <= t_s < exit_:
                    out.add(device_id)
        return out

    def transition_matrix(
        self, zone_to_scanner: dict[str, str], device_ids: set[str] | None = None
    ) -> dict[tuple[str, str], int]:
        """Ground-truth flows between scanners, the oracle for journey inference."""
        matrix: dict[tuple[str, str], int] = {}
        for device_id, z1, z2, _ in self.transitions:
            if device_ids is not None and device_id not in device_ids:
                continue
            if z1 not in zone_to_scanner or z2 not in zone_to_scanner:
                continue
            key = (zone_to_scanner[z1], zone_to_scanner[z2])
            matrix[key] = matrix.get(key, 0) + 1
        return matrix


def draw_gap_s(params: StateParams, rng: random.Random) -> float:
    """One inter-event gap: triangular over min/mode/max (uniform when no
    mode), rescaled so the mean gap matches the profile's event rate."""
    if params.interval_mode_s is None:
        raw = rng.uniform(params.interval_min_s, params.interval_max_s)
    else:
        raw = rng.triangular(params.interval_min_s, params.interval_max_s, params.interval_mode_s)
    return raw * params.gap_scale()


def generate_event_times(
    profile: DeviceProfile,
    state: ScreenState,
    duration_s: float,
    rng: random.Random,
) -> list[float]:
    """Event start times for a device held in one screen state."""
    params = profile.params(state)
    times = []
    t = 0.0
    while True:
        t += draw_gap_s(params, rng)
        if t >= duration_s:
            return times
        times.append(t)


def _random_mac(rng: random.Random, randomized: bool) -> MacAddress:
    octets = bytearray(rng.getrandbits(8) for _ in range(6))
    if randomized:
        octets[0] = (octets[0] & 0xFC) | 0x02  # locally administered, unicast
    else:
        octets[0] = octets[0] & 0xFC  # globally administered, unicast
    return MacAddress(bytes(octets))


def _zone_at(segments: list[tuple[str, float, float]], t_s: float) -> str | None:
    for zone, enter, exit_ in segments:
        if enter <= t_s < exit_:
            return zone
    return None


def run_scenario(scenario: Scenario) -> tuple[list[ProbeObservation], GroundTruth]:
    scenario.validate()
    scanner_by_zone = scenario.scanner_by_zone
    used_macs: set[bytes] = set()
    observations: list[ProbeObservation] = []

    for dev in scenario.devices:
        rng = random.Random(f"{scenario.seed}/{dev.device_id}")
        segments = scenario.itinerary.get(dev.device_id, [])
        cycles = sorted(scenario.power_cycles.get(dev.device_id, []))
        cycle_idx = 0
        session_ie = dev.session_ie
        per_event_random = dev.profile.randomization == Randomization.PER_EVENT
        t = 0.0
        while True:
            t += draw_gap_s(dev.profile.params(dev.state_at(t)), rng)
            if t >= scenario.duration_s:
                break
            while cycle_idx < len(cycles) and cycles[cycle_idx] <= t:
                session_ie = bytes(rng.getrandbits(8) for _ in range(16))
                cycle_idx += 1
            if per_event_random:
                mac = _random_mac(rng, randomized=True)
                while mac.octets in used_macs:  # collisions are astronomically rare
                    mac = _random_mac(rng, randomized=True)
                used_macs.add(mac.octets)
            else:
                mac = dev.burned_in_mac
            params = dev.profile.params(dev.state_at(t))
            offsets = sorted(rng.uniform(0, BURST_WINDOW_S) for _ in range(params.packets_per_event))
            for off in offsets:
                pkt_t = t + off
                zone = _zone_at(segments, pkt_t)
                if zone is None or zone not in scanner_by_zone:
                    continue
                observations.append(
                    ProbeObservation(
                        mac=mac,
                        rssi_dbm=RSSI_BASE_DBM + rng.randint(-RSSI_JITTER_DBM, RSSI_JITTER_DBM),
                        ssids=(),
                        ie_bytes=session_ie,
                        vendor_ie_bytes=b"",
                        captured_at_ms=scenario.start_time_ms + round(pkt_t * 1000),
                        scanner_id=scanner_by_zone[zone],
                    )
                )

    observations.sort(key=lambda o: o.captured_at_ms)
    return observations, GroundTruth.from_itinerary(scenario.itinerary)


# --- experiment report (single-device probing behavior) ---

@dataclass(frozen=True)
class ReportRow:
    event_time_ms: int
    packets: int
    gap_s: float | None


def emit_experiment_report(
    observations: Iterable[ProbeObservation], cluster_threshold_s: float = BURST_WINDOW_S
) -> list[ReportRow]:
    """Cluster a single-device observation stream into probe events.

    Packets closer than the threshold to their predecessor belong to the same
    event. The gap column is between consecutive event start times; the first
    event has no gap.
    """
    rows: list[ReportRow] = []
    event_start_ms: int | None = None
    prev_packet_ms: int | None = None
    count = 0

    def close_event():
        nonlocal rows
        gap = None
        if rows:
            gap = (event_start_ms - rows[-1].event_time_ms) / 1000.0
        rows.append(ReportRow(event_time_ms=event_start_ms, packets=count, gap_s=gap))

    for obs in sorted(observations, key=lambda o: o.captured_at_ms):
        if prev_packet_ms is not None and (
            obs.captured_at_ms - prev_packet_ms <= cluster_threshold_s * 1000
        ):
            count += 1
        else:
            if event_start_ms is not None:
                close_event()
            event_start_ms = obs.captured_at_ms
            count = 1
        prev_packet_ms = obs.captured_at_ms
    if event_start_ms is not None:
        close_event()
    return rows


def write_experiment_csv(rows: Iterable[ReportRow], out: IO[str]) -> None:
    writer = csv.writer(out)
    writer.writerow(["event_time_ms", "packets", "gap_s"])
    for row in rows:
        writer.writerow([row.event_time_ms, row.packets, "" if row.gap_s is None else f"{row.gap_s:.3f}"])


# --- scenario file loading ---

def _parse_profile(spec, field_name: str) -> DeviceProfile:
    if isinstance(spec, str):
        try:
            return builtin_profile(spec)
        except ValueError as e:
            raise ScenarioError(f"{field_name}: {e}")
    try:
        states = {}
        for state_name, p in spec["screen_states"].items():
            states[ScreenState(state_name)] = StateParams(
                events_per_hour=p["events_per_hour"],
                packets_per_event=p["packets_per_event"],
                interval_min_s=p["interval_min_s"],
                interval_max_s=p["interval_max_s"],
                interval_mode_s=p.get("interval_mode_s"),
            )
        return DeviceProfile(
            name=spec["name"],
            randomization=Randomization(spec["randomization"]),
            screen_states=states,
        )
    except (KeyError, TypeError, ValueError) as e:
        raise ScenarioError(f"{field_name}: bad inline profile: {e}")


def load_scenario(path: str | Path) -> Scenario:
    """Load a scenario from its YAML document (schema in the repo README)."""
    doc = yaml.safe_load(Path(path).read_text())
    if not isinstance(doc, dict):
        raise ScenarioError("scenario document must be a mapping")
    try:
        seed = int(doc["seed"])
        duration_s = float(doc["duration_s"])
        scanners = [(s["scanner_id"], s["zone_id"]) for s in doc["scanners"]]
    except (KeyError, TypeError) as e:
        raise ScenarioError(f"scenario missing field: {e}")

    seed_rng = random.Random(f"{seed}/scenario-defaults")
    devices: list[SimulatedDevice] = []
    itinerary: dict[str, list[tuple[str, float, float]]] = {}
    power_cycles: dict[str, list[float]] = {}
    for entry in doc.get("devices", []):
        try:
            device_id = entry["device_id"]
            profile = _parse_profile(entry["profile"], f"devices[{device_id}].profile")
            if "burned_in_mac" in entry:
                mac = MacAddress.from_str(entry["burned_in_mac"])
            else:
                mac = _random_mac(seed_rng, randomized=False)
            if "session_ie_hex" in entry:
                session_ie = bytes.fromhex(entry["session_ie_hex"])
            else:
                session_ie = bytes(seed_rng.getrandbits(8) for _ in range(16))
            schedule = [
                (float(s["at_s"]), ScreenState(s["state"]))
                for s in entry.get("screen_schedule", [])
            ]
            devices.append(
                SimulatedDevice(
                    device_id=device_id,
                    profile=profile,
                    burned_in_mac=mac,
                    session_ie=session_ie,
                    screen_schedule=schedule,
                )
            )
            itinerary[device_id] = [
                (seg["zone"], float(seg["enter_s"]), float(seg["exit_s"]))
                for seg in entry.get("itinerary", [])
            ]
            if entry.get("power_cycles_s"):
                power_cycles[device_id] = [float(t) for t in entry["power_cycles_s"]]
        except (KeyError, TypeError, ValueError) as e:
            if isinstance(e, ScenarioError):
                raise
            raise ScenarioError(f"devices: bad entry: {e}")

    scenario = Scenario(
        seed=seed,
        scanners=scanners,
        devices=devices,
        itinerary=itinerary,
        duration_s=duration_s,
        power_cycles=power_cycles,
        start_time_ms=int(doc.get("start_time_ms", DEFAULT_START_MS)),
    )
    scenario.validate()
    return scenario
