"""Shared fixtures: compact device profiles and scenario builders so tests
don't have to spell out the full built-in profiles."""
from __future__ import annotations

from probesense.core import MacAddress
from probesense.profiles import DeviceProfile, Randomization, ScreenState, StateParams
from probesense.sim import Scenario, SimulatedDevice


def make_profile(events_per_hour=60.0, packets=1, lo=30.0, hi=90.0, mode=60.0,
                 randomization=Randomization.NONE, name="test-phone") -> DeviceProfile:
    params = StateParams(events_per_hour, packets, lo, hi, mode)
    return DeviceProfile(
        name=name,
        randomization=randomization,
        screen_states={ScreenState.DISPLAY_OFF: params, ScreenState.DISPLAY_ON: params},
    )


def make_device(device_id: str, profile: DeviceProfile, mac_suffix: int = 1,
                session_ie: bytes | None = None) -> SimulatedDevice:
    return SimulatedDevice(
        device_id=device_id,
        profile=profile,
        burned_in_mac=MacAddress(bytes([0xA8, 0x9C, 0xED, 0, mac_suffix >> 8, mac_suffix & 0xFF])),
        session_ie=session_ie if session_ie is not None else f"ie-{device_id}".encode(),
    )


def single_zone_scenario(device: SimulatedDevice, duration_s: float, seed: int = 7,
                         zone: str = "A", scanner: str = "scan-A") -> Scenario:
    return Scenario(
        seed=seed,
        scanners=[(scanner, zone)],
        devices=[device],
        itinerary={device.device_id: [(zone, 0.0, duration_s)]},
        duration_s=duration_s,
    )
