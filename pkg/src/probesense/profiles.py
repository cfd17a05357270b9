"""Built-in phone probing profiles.

Each profile describes how one phone model probes in each screen state:
how many probe events per hour, how many packets per event, and the
min/max/mode of the inter-event interval. The four built-ins reproduce the
measured behavior of the corresponding handsets.
"""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum


class Randomization(Enum):
    NONE = "none"
    PER_EVENT = "per_event"


class ScreenState(Enum):
    DISPLAY_OFF = "display_off"
    DISPLAY_ON = "display_on"


@dataclass(frozen=True)
class StateParams:
    events_per_hour: float
    packets_per_event: int
    interval_min_s: float
    interval_max_s: float
    interval_mode_s: float | None = None

    def __post_init__(self):
        if self.events_per_hour <= 0:
            raise ValueError("events_per_hour must be positive")
        if self.packets_per_event < 1:
            raise ValueError("packets_per_event must be >= 1")
        if self.interval_mode_s is not None:
            if not (self.interval_min_s <= self.interval_mode_s <= self.interval_max_s):
                raise ValueError("interval mode must lie within [min, max]")
        elif self.interval_min_s > self.interval_max_s:
            raise ValueError("interval_min_s must be <= interval_max_s")

    def raw_mean_interval_s(self) -> float:
        """Mean of the triangular (or uniform, when no mode) interval shape."""
        if self.interval_mode_s is None:
            return (self.interval_min_s + self.interval_max_s) / 2.0
        return (self.interval_min_s + self.interval_mode_s + self.interval_max_s) / 3.0

    def gap_scale(self) -> float:
        """Calibration factor applied to interval draws so the realized event
        rate matches events_per_hour.

        The measured min/max/mode and the measured events/hr are not mutually
        consistent under a triangular model (the triangular mean can be off by
        5x), so the rate is taken as authoritative and the interval shape is
        scaled to fit it.
        """
        return (3600.0 / self.events_per_hour) / self.raw_mean_interval_s()


@dataclass(frozen=True)
class DeviceProfile:
    name: str
    randomization: Randomization
    screen_states: dict[ScreenState, StateParams]

    def params(self, state: ScreenState) -> StateParams:
        try:
            return self.screen_states[state]
        except KeyError:
            raise ValueError(f"profile {self.name} has no params for {state.value}")


def _mins(m: float, s: float = 0) -> float:
    return m * 60 + s


BUILTIN_PROFILES: dict[str, DeviceProfile] = {
    "iPhone6S": DeviceProfile(
        name="iPhone6S",
        randomization=Randomization.PER_EVENT,
        screen_states={
            ScreenState.DISPLAY_OFF: StateParams(10, 1, 33, _mins(11, 15), _mins(9)),
            ScreenState.DISPLAY_ON: StateParams(54, 2, 3, _mins(3), 45),
        },
    ),
    "SamsungS7": DeviceProfile(
        name="SamsungS7",
        randomization=Randomization.PER_EVENT,
        screen_states={
            ScreenState.DISPLAY_OFF: StateParams(13, 6, _mins(2, 9), _mins(7, 46), _mins(2, 10)),
            ScreenState.DISPLAY_ON: StateParams(18, 9, 6, _mins(6, 5), _mins(3)),
        },
    ),
    "SamsungJ5": DeviceProfile(
        name="SamsungJ5",
        randomization=Randomization.NONE,
        screen_states={
            ScreenState.DISPLAY_OFF: StateParams(4, 10, _mins(9, 12), _mins(15, 22)),
            ScreenState.DISPLAY_ON: StateParams(19, 10, _mins(2, 8), _mins(8, 36), _mins(2, 8)),
        },
    ),
    "XiaomiMiNote3": DeviceProfile(
        name="XiaomiMiNote3",
        randomization=Randomization.NONE,
        screen_states={
            ScreenState.DISPLAY_OFF: StateParams(89, 5, 1, _mins(9, 29), _mins(1)),
            ScreenState.DISPLAY_ON: StateParams(24, 5, _mins(1), _mins(9, 2), _mins(1)),
        },
    ),
}


def builtin_profile(model_name: str) -> DeviceProfile:
    """Look up a built-in phone profile by model name."""
    try:
        return BUILTIN_PROFILES[model_name]
    except KeyError:
        available = ", ".join(sorted(BUILTIN_PROFILES))
        raise ValueError(f"unknown phone model {model_name!r}; available: {available}")
